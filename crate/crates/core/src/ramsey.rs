//! Colorings of situs levels: homogeneous simplices, the c-neighbourhood filter
//! and the quotient coloring morphism.

use crate::error::{Error, Guard, Result};
use crate::filters::{self, Filter, SetMap, Subset};
use crate::simplex::{quotient, set_corepresented, weakly_increasing_lists, LevelEquivalence, Morphism, Situs};
use serde::Serialize;

/// A color for every simplex of one level.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Coloring {
    level: usize,
    colors: Vec<usize>,
    palette: usize,
}

impl Coloring {
    /// Checks the map is total on level `level` and uses colors below `palette`.
    pub fn new(x: &Situs, level: usize, colors: Vec<usize>, palette: usize) -> Result<Self> {
        if level == 0 || level > x.depth() {
            return Err(Error::Depth(format!("coloring level {level} outside 1..={}", x.depth())));
        }
        if colors.len() != x.size(level) {
            return Err(Error::domain(format!(
                "coloring has {} entries but level {level} has {} simplices",
                colors.len(),
                x.size(level)
            )));
        }
        if let Some(c) = colors.iter().find(|&&c| c >= palette) {
            return Err(Error::domain(format!("color {c} outside palette of size {palette}")));
        }
        Ok(Coloring { level, colors, palette })
    }

    pub fn constant(x: &Situs, level: usize) -> Result<Self> {
        let size = if (1..=x.depth()).contains(&level) { x.size(level) } else { 0 };
        Coloring::new(x, level, vec![0; size], 1)
    }

    /// Level-2 coloring of a tuple situs from a symmetric edge coloring; loops get color 0.
    pub fn from_edges(x: &Situs, edge: impl Fn(usize, usize) -> usize, palette: usize) -> Result<Self> {
        if x.vertices().is_none() || x.depth() < 2 {
            return Err(Error::domain("edge colorings need a tuple situs of depth at least 2"));
        }
        let colors = x
            .simplices(2)
            .iter()
            .map(|t| {
                let (a, b) = (t[0] as usize, t[1] as usize);
                match a.cmp(&b) {
                    std::cmp::Ordering::Equal => 0,
                    std::cmp::Ordering::Less => edge(a, b),
                    std::cmp::Ordering::Greater => edge(b, a),
                }
            })
            .collect();
        Coloring::new(x, 2, colors, palette)
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn colors(&self) -> &[usize] {
        &self.colors
    }

    pub fn palette(&self) -> usize {
        self.palette
    }

    pub fn color(&self, x: usize) -> usize {
        self.colors[x]
    }
}

/// Strictly increasing index lists of length `k` drawn from `1..=m`.
pub fn strict_lists(k: usize, m: usize) -> Vec<Vec<usize>> {
    weakly_increasing_lists(k, m).into_iter().filter(|l| l.windows(2).all(|w| w[0] < w[1])).collect()
}

/// Degenerate simplices per level: images of lower simplices under surjective degeneracies.
pub fn degenerate_sets(x: &Situs) -> Vec<Subset> {
    (1..=x.depth())
        .map(|k| {
            let mut s = filters::subset(x.size(k), []);
            for m in 1..k {
                for list in weakly_increasing_lists(k, m) {
                    if (1..=m).all(|v| list.contains(&v)) {
                        for &f in x.face(m, &list) {
                            s.insert(f);
                        }
                    }
                }
            }
            s
        })
        .collect()
}

/// Hereditary non-degeneracy flags for every simplex of every level.
#[derive(Clone, Debug)]
pub struct Nondegeneracy {
    flags: Vec<Vec<bool>>,
}

impl Nondegeneracy {
    pub fn new(x: &Situs) -> Self {
        let degenerate = degenerate_sets(x);
        let mut flags: Vec<Vec<bool>> = Vec::with_capacity(x.depth());
        for m in 1..=x.depth() {
            let mut level = vec![true; x.size(m)];
            for (i, flag) in level.iter_mut().enumerate() {
                *flag = !degenerate[m - 1].contains(i)
                    && (2..m).all(|k| {
                        strict_lists(k, m).iter().all(|l| flags[k - 1][x.face(m, l)[i]])
                    });
            }
            flags.push(level);
        }
        Nondegeneracy { flags }
    }

    pub fn get(&self, m: usize, x: usize) -> bool {
        self.flags[m - 1][x]
    }
}

/// Whether every strictly increasing face of simplex `x` at level `m` is non-degenerate.
pub fn is_hereditarily_nondegenerate(situs: &Situs, m: usize, x: usize) -> Result<bool> {
    if m == 0 || m > situs.depth() || x >= situs.size(m) {
        return Err(Error::domain(format!("no simplex {x} at level {m}")));
    }
    Ok(Nondegeneracy::new(situs).get(m, x))
}

/// Precomputed hereditarily non-degenerate level-`n` faces of every level-`m` simplex.
#[derive(Clone, Debug)]
pub struct HomogeneityIndex {
    faces: Vec<Vec<usize>>,
}

impl HomogeneityIndex {
    pub fn new(x: &Situs, n: usize, m: usize) -> Result<Self> {
        if n == 0 || n > m || m > x.depth() {
            return Err(Error::precondition(format!("need 1 <= n = {n} <= m = {m} <= depth {}", x.depth())));
        }
        let nd = Nondegeneracy::new(x);
        let lists = strict_lists(n, m);
        let faces = (0..x.size(m))
            .map(|i| {
                let mut fs: Vec<usize> =
                    lists.iter().map(|l| x.face(m, l)[i]).filter(|&f| nd.get(n, f)).collect();
                fs.sort_unstable();
                fs.dedup();
                fs
            })
            .collect();
        Ok(HomogeneityIndex { faces })
    }

    pub fn is_homogeneous(&self, colors: &[usize], x: usize) -> bool {
        let f = &self.faces[x];
        f.iter().all(|&y| colors[y] == colors[f[0]])
    }

    pub fn homogeneous(&self, colors: &[usize]) -> Subset {
        filters::subset(self.faces.len(), (0..self.faces.len()).filter(|&x| self.is_homogeneous(colors, x)))
    }

    pub fn faces(&self, x: usize) -> &[usize] {
        &self.faces[x]
    }
}

/// Simplices at level `m` whose hereditarily non-degenerate level-`n` faces share one color.
pub fn homogeneous_simplices(x: &Situs, c: &Coloring, m: usize) -> Result<Subset> {
    Ok(HomogeneityIndex::new(x, c.level, m)?.homogeneous(&c.colors))
}

/// The c-neighbourhood filter: principal on the homogeneous simplices of each level.
pub fn c_neighbourhood_filters(x: &Situs, c: &Coloring) -> Result<Vec<Filter>> {
    (1..=x.depth())
        .map(|m| {
            if m < c.level {
                Ok(Filter::antidiscrete(x.size(m)))
            } else {
                Filter::principal(x.size(m), homogeneous_simplices(x, c, m)?)
            }
        })
        .collect()
}

/// The ≈_c classes: matching non-degeneracy patterns and colors on strict faces.
pub fn coloring_equivalence(x: &Situs, c: &Coloring) -> LevelEquivalence {
    let nd = Nondegeneracy::new(x);
    let lists: Vec<Vec<(usize, Vec<usize>)>> = (1..=x.depth())
        .map(|m| (1..=m).flat_map(|k| strict_lists(k, m).into_iter().map(move |l| (k, l))).collect())
        .collect();
    LevelEquivalence::by_key(x, |m, i| {
        lists[m - 1]
            .iter()
            .map(|(k, l)| {
                let f = x.face(m, l)[i];
                match (nd.get(*k, f), *k == c.level) {
                    (false, _) => None,
                    (true, true) => Some(Some(c.color(f))),
                    (true, false) => Some(None),
                }
            })
            .collect::<Vec<_>>()
    })
}

/// Source with the c-neighbourhood filter, the quotient `C_•` and the projection.
#[derive(Clone, Debug)]
pub struct ColoringQuotient {
    pub source: Situs,
    pub target: Situs,
    pub map: Morphism,
}

impl ColoringQuotient {
    /// Pull the target filters back along the projection and compare with the source filters.
    pub fn pullback_matches(&self) -> Result<bool> {
        for n in 1..=self.source.depth() {
            let proj = SetMap::new(self.source.size(n), self.target.size(n), self.map.level(n).to_vec())?;
            let pulled = filters::coarsest_filter(self.source.size(n), &[(proj, self.target.filter(n).clone())])?;
            if !pulled.same_as(self.source.filter(n)) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn class_counts(&self) -> Vec<usize> {
        (1..=self.target.depth()).map(|n| self.target.size(n)).collect()
    }
}

/// Quotient `c_•: X → C_•` by ≈_c, the source carrying the c-neighbourhood filter.
pub fn coloring_quotient(x: &Situs, c: &Coloring) -> Result<ColoringQuotient> {
    let source = x.with_filters(c_neighbourhood_filters(x, c)?)?;
    let (target, map) = quotient(&source, &coloring_equivalence(&source, c))?;
    Ok(ColoringQuotient { source, target, map })
}

/// Outcome of an exhaustive edge-coloring sweep.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RamseyReport {
    pub atoms: usize,
    pub colors: usize,
    pub clique: usize,
    pub colorings_checked: usize,
    pub always_homogeneous: bool,
    /// Edge colors in lexicographic pair order for a coloring without a homogeneous clique.
    pub counterexample: Option<Vec<usize>>,
}

/// All pairs `i < j` of `0..n` in lexicographic order.
pub fn edges(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect()
}

/// Whether every `colors`-coloring of pairs of `atoms` points has a homogeneous non-degenerate `clique`-simplex.
pub fn ramsey_sweep(atoms: usize, colors: usize, clique: usize, guard: &Guard) -> Result<RamseyReport> {
    if colors == 0 || clique < 2 {
        return Err(Error::domain("need at least one color and clique size at least 2"));
    }
    guard.atoms(atoms)?;
    guard.depth(clique)?;
    let es = edges(atoms);
    let total = (colors as u128).checked_pow(es.len() as u32).filter(|&t| t <= usize::MAX as u128);
    let total = total.ok_or_else(|| Error::Resource { what: "colorings".into(), value: usize::MAX, bound: guard.max_candidates })? as usize;
    guard.candidates(total)?;
    let labels = (0..atoms).map(crate::fostruct::default_name).collect();
    let x = set_corepresented(labels, clique)?;
    guard.carrier(x.size(clique))?;
    let index = HomogeneityIndex::new(&x, 2, clique)?;
    let nd = Nondegeneracy::new(&x);
    let cliques: Vec<usize> = (0..x.size(clique)).filter(|&i| nd.get(clique, i)).collect();
    let pair_edge: Vec<Option<usize>> = x
        .simplices(2)
        .iter()
        .map(|t| {
            let (a, b) = (t[0].min(t[1]) as usize, t[0].max(t[1]) as usize);
            (a != b).then(|| es.iter().position(|&e| e == (a, b)).unwrap())
        })
        .collect();
    let decode = |mut code: usize| -> Vec<usize> {
        (0..es.len())
            .map(|_| {
                let d = code % colors;
                code /= colors;
                d
            })
            .collect()
    };
    let bad = |code: usize| -> bool {
        let edge_colors = decode(code);
        let level2: Vec<usize> = pair_edge.iter().map(|e| e.map_or(0, |e| edge_colors[e])).collect();
        !cliques.iter().any(|&q| index.is_homogeneous(&level2, q))
    };
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(total.max(1));
    let found = std::thread::scope(|s| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let bad = &bad;
                s.spawn(move || (w..total).step_by(workers).find(|&code| bad(code)))
            })
            .collect();
        handles.into_iter().filter_map(|h| h.join().expect("worker panicked")).min()
    });
    Ok(RamseyReport {
        atoms,
        colors,
        clique,
        colorings_checked: total,
        always_homogeneous: found.is_none(),
        counterexample: found.map(decode),
    })
}
