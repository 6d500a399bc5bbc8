//! Base and strong generating sets for signed slot groups.
//!
//! The base is always the complete position-ordered sequence `0..n+2`, sign
//! points included, so level `i` of the chain is the pointwise stabilizer of
//! `0..i`. Levels whose base point is fixed by the whole subgroup keep a
//! singleton orbit.

use std::collections::VecDeque;
use std::fmt::Write as _;

use num_bigint::BigUint;
use thiserror::Error;

use crate::signed_perm::{Sign, SignedPerm};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroupError {
    #[error("generator has degree {found}, expected {expected}")]
    DegreeMismatch { expected: usize, found: usize },
    #[error("point {target} is not in the orbit of base point {level}")]
    OutsideOrbit { level: usize, target: usize },
    #[error("level {0} out of range")]
    BadLevel(usize),
}

const NONE: u32 = u32::MAX;

/// One level of the stabilizer chain: a Schreier tree rooted at the base
/// point, with the coset representatives it encodes.
#[derive(Debug, Clone)]
pub struct Level {
    /// Indices into the strong generating set of the generators fixing all
    /// earlier base points.
    gens: Vec<usize>,
    /// Orbit of the base point in breadth-first order.
    tree_order: Vec<usize>,
    sorted_orbit: Vec<usize>,
    /// Position of each point in `tree_order`, or `NONE`.
    index: Vec<u32>,
    /// Tree edge `(parent point, generator index)` per orbit position.
    parent: Vec<(usize, usize)>,
    reps: Vec<SignedPerm>,
    rep_inverses: Vec<SignedPerm>,
}

impl Level {
    fn build(base: usize, gens: Vec<usize>, strong: &[SignedPerm], m: usize) -> Level {
        let mut index = vec![NONE; m];
        let mut orbit = vec![base];
        let mut parent = vec![(base, usize::MAX)];
        let mut reps = vec![SignedPerm::identity(m - 2)];
        index[base] = 0;
        let mut queue = VecDeque::from([base]);
        while let Some(b) = queue.pop_front() {
            let rb = reps[index[b] as usize].clone();
            for &g in &gens {
                let img = strong[g].apply(b);
                if index[img] == NONE {
                    index[img] = orbit.len() as u32;
                    orbit.push(img);
                    parent.push((b, g));
                    reps.push(strong[g].compose(&rb));
                    queue.push_back(img);
                }
            }
        }
        let rep_inverses = reps.iter().map(SignedPerm::inverse).collect();
        let mut sorted_orbit = orbit.clone();
        sorted_orbit.sort_unstable();
        Level {
            gens,
            tree_order: orbit,
            sorted_orbit,
            index,
            parent,
            reps,
            rep_inverses,
        }
    }

    pub fn orbit(&self) -> &[usize] {
        &self.sorted_orbit
    }

    pub fn contains(&self, point: usize) -> bool {
        self.index[point] != NONE
    }

    /// Element of this level mapping the base point to `point`.
    pub fn rep(&self, point: usize) -> Option<&SignedPerm> {
        match self.index[point] {
            NONE => None,
            k => Some(&self.reps[k as usize]),
        }
    }

    fn rep_inverse(&self, point: usize) -> Option<&SignedPerm> {
        match self.index[point] {
            NONE => None,
            k => Some(&self.rep_inverses[k as usize]),
        }
    }

    pub fn generators(&self) -> &[usize] {
        &self.gens
    }
}

/// A signed permutation group stored as a stabilizer chain.
#[derive(Debug, Clone)]
pub struct Bsgs {
    n: usize,
    strong: Vec<SignedPerm>,
    levels: Vec<Level>,
    order: BigUint,
}

fn first_moved(p: &SignedPerm) -> usize {
    p.images()
        .iter()
        .enumerate()
        .find(|(i, &x)| *i != x as usize)
        .map_or(p.images().len(), |(i, _)| i)
}

impl Bsgs {
    /// Deterministic Schreier-Sims over the complete position-ordered base.
    pub fn schreier_sims(n: usize, generators: &[SignedPerm]) -> Result<Bsgs, GroupError> {
        let m = n + 2;
        let mut strong: Vec<SignedPerm> = Vec::new();
        for g in generators {
            if g.degree() != n {
                return Err(GroupError::DegreeMismatch {
                    expected: n,
                    found: g.degree(),
                });
            }
            if !g.is_identity() && !strong.contains(g) {
                strong.push(g.clone());
            }
        }
        let gens_for = |strong: &[SignedPerm], level: usize| -> Vec<usize> {
            (0..strong.len())
                .filter(|&k| first_moved(&strong[k]) >= level)
                .collect()
        };
        let mut levels: Vec<Level> = (0..m)
            .map(|i| Level::build(i, gens_for(&strong, i), &strong, m))
            .collect();

        let mut i = m;
        'outer: while i > 0 {
            i -= 1;
            let level = &levels[i];
            for pos in 0..level.tree_order.len() {
                let beta = level.tree_order[pos];
                for &g in &level.gens {
                    let img = strong[g].apply(beta);
                    let k = level.index[img] as usize;
                    if level.parent[k] == (beta, g) {
                        continue;
                    }
                    let h = level.rep_inverses[k]
                        .compose(&strong[g])
                        .compose(&level.reps[pos]);
                    let (residue, j) = sift(&levels, h, i + 1);
                    if j < m {
                        strong.push(residue);
                        for (lv, level) in levels.iter_mut().enumerate().take(j + 1) {
                            *level = Level::build(lv, gens_for(&strong, lv), &strong, m);
                        }
                        i = j + 1;
                        continue 'outer;
                    }
                }
            }
        }

        let order = levels.iter().fold(BigUint::from(1u32), |acc, l| {
            acc * BigUint::from(l.tree_order.len())
        });
        Ok(Bsgs {
            n,
            strong,
            levels,
            order,
        })
    }

    pub fn trivial(n: usize) -> Bsgs {
        Bsgs::schreier_sims(n, &[]).expect("no generators")
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> &BigUint {
        &self.order
    }

    pub fn strong_generators(&self) -> &[SignedPerm] {
        &self.strong
    }

    pub fn level(&self, i: usize) -> &Level {
        &self.levels[i]
    }

    /// Number of levels, `n + 2`.
    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    /// Orbit of base point `i` under the level-`i` stabilizer, ascending.
    pub fn base_orbit(&self, i: usize) -> &[usize] {
        self.levels[i].orbit()
    }

    /// Orbit of an arbitrary point under the level-`i` stabilizer, ascending.
    pub fn orbit_of(&self, level: usize, point: usize) -> Result<Vec<usize>, GroupError> {
        let l = self.levels.get(level).ok_or(GroupError::BadLevel(level))?;
        if point == level {
            return Ok(l.orbit().to_vec());
        }
        let m = self.n + 2;
        let mut seen = vec![false; m];
        seen[point] = true;
        let mut out = vec![point];
        let mut k = 0;
        while k < out.len() {
            let b = out[k];
            for &g in &l.gens {
                let img = self.strong[g].apply(b);
                if !seen[img] {
                    seen[img] = true;
                    out.push(img);
                }
            }
            k += 1;
        }
        out.sort_unstable();
        Ok(out)
    }

    /// Element of the level-`i` stabilizer mapping `i` to `target`.
    pub fn coset_rep(&self, level: usize, target: usize) -> Result<&SignedPerm, GroupError> {
        self.levels
            .get(level)
            .ok_or(GroupError::BadLevel(level))?
            .rep(target)
            .ok_or(GroupError::OutsideOrbit { level, target })
    }

    pub fn contains(&self, p: &SignedPerm) -> bool {
        p.degree() == self.n && sift(&self.levels, p.clone(), 0).1 == self.n + 2
    }

    /// True when the group contains `-id`, which forces every tensor with
    /// these slot symmetries to vanish.
    pub fn contains_minus_identity(&self) -> bool {
        self.contains(&SignedPerm::signed_identity(self.n, Sign::Minus))
    }

    /// Tree path of a coset representative as generator indices, root first.
    pub fn tree_path(&self, level: usize, target: usize) -> Option<Vec<usize>> {
        let l = &self.levels[level];
        let mut k = l.index[target];
        if k == NONE {
            return None;
        }
        let mut path = Vec::new();
        while l.tree_order[k as usize] != level {
            let (p, g) = l.parent[k as usize];
            path.push(g);
            k = l.index[p];
        }
        path.reverse();
        Some(path)
    }

    /// Human readable chain dump: one line per non-trivial level.
    pub fn dump(&self) -> String {
        let mut s = format!("order {}\n", self.order);
        for (i, l) in self.levels.iter().enumerate() {
            if l.tree_order.len() == 1 {
                continue;
            }
            let orbit: Vec<String> = l.orbit().iter().map(|x| (x + 1).to_string()).collect();
            let gens: Vec<String> = l
                .gens
                .iter()
                .map(|&g| self.strong[g].to_cycle_string())
                .collect();
            let _ = writeln!(
                s,
                "level {}: orbit {{{}}} gens {}",
                i + 1,
                orbit.join(","),
                gens.join(" ")
            );
        }
        s
    }
}

/// Sifts `h` through the chain from level `start`. Returns the residue and the
/// level where sifting stopped (`depth` when it went all the way through).
fn sift(levels: &[Level], mut h: SignedPerm, start: usize) -> (SignedPerm, usize) {
    for (lv, level) in levels.iter().enumerate().skip(start) {
        let b = h.apply(lv);
        if b == lv {
            continue;
        }
        match level.rep_inverse(b) {
            Some(inv) => h = inv.compose(&h),
            None => return (h, lv),
        }
    }
    let m = levels.len();
    (h, m)
}

/// Slot-space map of totally symmetric (positive ids) and antisymmetric
/// (negative ids) subsets. Ids grow left to right and are never reused.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymmetricSubsets {
    pub entries: Vec<i32>,
    /// Set when the group contains `-id`.
    pub inconsistent: bool,
}

impl SymmetricSubsets {
    pub fn zeros(n: usize) -> SymmetricSubsets {
        SymmetricSubsets {
            entries: vec![0; n],
            inconsistent: false,
        }
    }
}

/// Finds the subsets via signed-transposition membership tests.
pub fn detect_symmetric_subsets(bsgs: &Bsgs) -> SymmetricSubsets {
    let n = bsgs.degree();
    let mut entries = vec![0i32; n];
    let mut next_id = 1;
    let transposition = |i: usize, j: usize, sign: Sign| {
        let mut v = SignedPerm::signed_identity(n, sign).images().to_vec();
        v.swap(i, j);
        SignedPerm::from_images(v).expect("transposition")
    };
    for i in 0..n {
        if entries[i] != 0 {
            continue;
        }
        let mut sign = None;
        for j in (i + 1)..n {
            if entries[j] != 0 {
                continue;
            }
            for s in [Sign::Plus, Sign::Minus] {
                if sign.is_some_and(|x| x != s) {
                    continue;
                }
                if bsgs.contains(&transposition(i, j, s)) {
                    sign = Some(s);
                    let id = next_id * s.as_i32();
                    entries[i] = id;
                    entries[j] = id;
                    break;
                }
            }
        }
        if entries[i] != 0 {
            next_id += 1;
        }
    }
    SymmetricSubsets {
        entries,
        inconsistent: bsgs.contains_minus_identity(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn cyc(n: usize, s: &str) -> SignedPerm {
        SignedPerm::parse_cycles(n, s).unwrap()
    }

    fn gens(n: usize, list: &[&str]) -> Vec<SignedPerm> {
        list.iter().map(|s| cyc(n, s)).collect()
    }

    fn closure(n: usize, gens: &[SignedPerm]) -> HashSet<SignedPerm> {
        let mut set = HashSet::from([SignedPerm::identity(n)]);
        let mut frontier = vec![SignedPerm::identity(n)];
        while let Some(x) = frontier.pop() {
            for g in gens {
                let y = g.compose(&x);
                if set.insert(y.clone()) {
                    frontier.push(y);
                }
            }
        }
        set
    }

    fn riemann() -> Bsgs {
        Bsgs::schreier_sims(4, &gens(4, &["-(1,2)", "+(1,3)(2,4)", "-(3,4)"])).unwrap()
    }

    #[test]
    fn s5_from_two_generators() {
        let b = Bsgs::schreier_sims(5, &gens(5, &["(1,2)", "(1,2,3,4,5)"])).unwrap();
        assert_eq!(*b.order(), BigUint::from(120u32));
        let sizes: Vec<usize> = (0..5).map(|i| b.base_orbit(i).len()).collect();
        assert_eq!(sizes, vec![5, 4, 3, 2, 1]);
    }

    #[test]
    fn riemann_group_order_and_membership() {
        let b = riemann();
        assert_eq!(*b.order(), BigUint::from(8u32));
        assert!(b.contains(&cyc(4, "+(1,2)(3,4)")));
        assert!(!b.contains(&cyc(4, "+(1,2)")));
        assert!(b.contains(&cyc(4, "-(1,2)")));
        assert!(b.contains(&SignedPerm::identity(4)));
        assert_eq!(b.base_orbit(0), &[0, 1, 2, 3]);
        let all = closure(4, b.strong_generators());
        assert_eq!(all.len(), 8);
        assert!(all.iter().all(|p| b.contains(p)));
    }

    #[test]
    fn riemann_coset_rep() {
        let b = riemann();
        let r = b.coset_rep(0, 2).unwrap();
        assert_eq!(r.apply(0), 2);
        assert!(b.contains(r));
        assert!(b.coset_rep(0, 0).unwrap().is_identity());
        assert_eq!(
            b.coset_rep(0, 5),
            Err(GroupError::OutsideOrbit {
                level: 0,
                target: 5
            })
        );
    }

    #[test]
    fn trivial_group() {
        let b = Bsgs::trivial(4);
        assert_eq!(*b.order(), BigUint::from(1u32));
        assert!(b.contains(&SignedPerm::identity(4)));
        assert!(!b.contains(&cyc(4, "(1,2)")));
    }

    #[test]
    fn symmetric_block_orbits() {
        let b = Bsgs::schreier_sims(6, &gens(6, &["(3,4)", "(4,5)", "(5,6)"])).unwrap();
        assert_eq!(b.base_orbit(2), &[2, 3, 4, 5]);
        assert_eq!(b.orbit_of(2, 4).unwrap(), vec![2, 3, 4, 5]);
        assert_eq!(b.orbit_of(3, 1).unwrap(), vec![1]);
    }

    #[test]
    fn subsets_examples() {
        let t = Bsgs::schreier_sims(6, &gens(6, &["(3,4)", "(4,5)", "(5,6)"])).unwrap();
        assert_eq!(detect_symmetric_subsets(&t).entries, vec![0, 0, 1, 1, 1, 1]);
        assert_eq!(
            detect_symmetric_subsets(&riemann()).entries,
            vec![-1, -1, -2, -2]
        );
        let tr = Bsgs::schreier_sims(
            10,
            &gens(
                10,
                &[
                    "(3,4)",
                    "(4,5)",
                    "(5,6)",
                    "-(7,8)",
                    "+(7,9)(8,10)",
                    "-(9,10)",
                ],
            ),
        )
        .unwrap();
        let ss = detect_symmetric_subsets(&tr);
        assert_eq!(ss.entries, vec![0, 0, 1, 1, 1, 1, -2, -2, -3, -3]);
        assert!(!ss.inconsistent);
    }

    #[test]
    fn pairwise_group_has_no_subsets() {
        let b = Bsgs::schreier_sims(6, &gens(6, &["(1,3)(2,4)", "(3,5)(4,6)"])).unwrap();
        assert_eq!(detect_symmetric_subsets(&b).entries, vec![0; 6]);
        assert_eq!(*b.order(), BigUint::from(6u32));
    }

    #[test]
    fn mixed_signs_flag_inconsistency() {
        let b = Bsgs::schreier_sims(3, &gens(3, &["(1,2)", "-(2,3)"])).unwrap();
        assert!(detect_symmetric_subsets(&b).inconsistent);
        assert!(b.contains_minus_identity());
    }

    #[test]
    fn tree_path_rebuilds_rep() {
        let b = Bsgs::schreier_sims(5, &gens(5, &["(1,2,3,4,5)", "(1,2)"])).unwrap();
        for t in b.base_orbit(0).to_vec() {
            let path = b.tree_path(0, t).unwrap();
            let mut p = SignedPerm::identity(5);
            for g in path {
                p = b.strong_generators()[g].compose(&p);
            }
            assert_eq!(&p, b.coset_rep(0, t).unwrap());
        }
    }

    #[test]
    fn dump_lists_levels() {
        let d = riemann().dump();
        assert!(d.starts_with("order 8"));
        assert!(d.contains("level 1: orbit {1,2,3,4}"));
    }

    #[test]
    fn degree_mismatch() {
        assert!(Bsgs::schreier_sims(3, &[SignedPerm::identity(4)]).is_err());
    }
}
