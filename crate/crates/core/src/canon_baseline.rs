//! Double-coset search with an explicit label group.
//!
//! For each slot in turn every stored configuration is expanded over the
//! slot-stabilizer orbit, the least reachable label is brought into the
//! slot, and duplicates are removed. The number of stored configurations
//! can grow factorially.

use std::time::Instant;

use thiserror::Error;

use crate::label_context::LabelContext;
use crate::perm_group::Bsgs;
use crate::signed_perm::SignedPerm;
use crate::CanonResult;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BaselineError {
    #[error("deadline passed at slot {slot} with {configs} configurations")]
    Deadline { slot: usize, configs: usize },
    #[error("configuration budget exceeded at slot {slot} ({configs} configurations)")]
    Budget { slot: usize, configs: usize },
    #[error("label {label} is not reachable at level {level}")]
    Unreachable { level: usize, label: usize },
}

/// Label group with a full base, supporting base change by conjugation.
///
/// The groups built from an index classification are direct products of
/// one group per class, and every class is generated by adjacent swaps, so
/// the base in label order is strong from the start.
#[derive(Debug, Clone)]
pub struct LabelBsgs {
    n: usize,
    gens: Vec<SignedPerm>,
    base: Vec<usize>,
}

impl LabelBsgs {
    pub fn new(n: usize, gens: Vec<SignedPerm>) -> LabelBsgs {
        LabelBsgs {
            n,
            gens,
            base: (0..n).collect(),
        }
    }

    pub fn from_context(ctx: &LabelContext) -> LabelBsgs {
        LabelBsgs::new(ctx.len(), ctx.generators())
    }

    pub fn base(&self) -> &[usize] {
        &self.base
    }

    pub fn generators(&self) -> &[SignedPerm] {
        &self.gens
    }

    /// Generators fixing the first `i` base points.
    pub fn level_generators(&self, i: usize) -> Vec<&SignedPerm> {
        self.gens
            .iter()
            .filter(|g| self.base[..i].iter().all(|&b| g.apply(b) == b))
            .collect()
    }

    /// For every label, the least label of its orbit under level `i`.
    pub fn orbit_minima(&self, i: usize) -> Vec<usize> {
        let gens = self.level_generators(i);
        let mut least = vec![usize::MAX; self.n];
        for start in 0..self.n {
            if least[start] != usize::MAX {
                continue;
            }
            // Labels are visited in ascending order, so `start` is the
            // least element of its orbit.
            let mut stack = vec![start];
            least[start] = start;
            while let Some(x) = stack.pop() {
                for g in &gens {
                    let y = g.apply(x);
                    if least[y] == usize::MAX {
                        least[y] = start;
                        stack.push(y);
                    }
                }
            }
        }
        least
    }

    /// Orbit of `from` under level `i`, each point with an element of the
    /// level mapping `from` to it.
    pub fn transversal(&self, i: usize, from: usize) -> Vec<Option<SignedPerm>> {
        let gens = self.level_generators(i);
        let mut reps: Vec<Option<SignedPerm>> = vec![None; self.n];
        reps[from] = Some(SignedPerm::identity(self.n));
        let mut queue = std::collections::VecDeque::from([from]);
        while let Some(x) = queue.pop_front() {
            let rx = reps[x].clone().expect("visited");
            for g in &gens {
                let y = g.apply(x);
                if reps[y].is_none() {
                    reps[y] = Some(g.compose(&rx));
                    queue.push_back(y);
                }
            }
        }
        reps
    }

    fn conjugate(&mut self, c: &SignedPerm, from: usize) {
        let ci = c.inverse();
        for g in &mut self.gens {
            *g = c.compose(g).compose(&ci);
        }
        for b in &mut self.base[from..] {
            *b = c.apply(*b);
        }
    }

    /// Makes `label` the base point of level `i`, leaving earlier base
    /// points in place.
    pub fn reorder_base(&mut self, i: usize, label: usize) -> Result<(), BaselineError> {
        if self.base[i] == label {
            return Ok(());
        }
        let err = BaselineError::Unreachable { level: i, label };
        if let Some(c) = self.transversal(i, self.base[i])[label].clone() {
            self.conjugate(&c, i);
            return Ok(());
        }
        // Another orbit: conjugate its earliest base point onto `label` and
        // rotate it forward. Orbits of different classes commute, so the
        // relative order inside each class is what keeps the base strong.
        let reps = self.transversal(i, label);
        let k = (i + 1..self.n)
            .find(|&k| reps[self.base[k]].is_some())
            .ok_or(err)?;
        let c = reps[self.base[k]].as_ref().expect("in orbit").inverse();
        self.conjugate(&c, i);
        let b = self.base.remove(k);
        debug_assert_eq!(b, label);
        self.base.insert(i, b);
        Ok(())
    }
}

/// Limits for one search. Both default to unlimited.
#[derive(Debug, Clone, Copy, Default)]
pub struct BaselineOptions {
    pub deadline: Option<Instant>,
    pub max_configs: Option<usize>,
}

/// Number of stored configurations after each slot.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BaselineTrace {
    pub sizes_after: Vec<usize>,
}

impl BaselineTrace {
    pub fn max_configs(&self) -> usize {
        self.sizes_after.iter().copied().max().unwrap_or(1)
    }

    /// The initial configuration plus everything stored through slot `k`.
    pub fn visits_through(&self, k: usize) -> usize {
        1 + self.sizes_after.iter().take(k).sum::<usize>()
    }
}

pub fn butler_portugal(g_init: &SignedPerm, s: &Bsgs, ctx: &LabelContext) -> CanonResult {
    butler_portugal_traced(g_init, s, ctx, BaselineOptions::default())
        .expect("unlimited run")
        .0
}

pub fn butler_portugal_traced(
    g_init: &SignedPerm,
    s: &Bsgs,
    ctx: &LabelContext,
    opts: BaselineOptions,
) -> Result<(CanonResult, BaselineTrace), BaselineError> {
    let mut trace = BaselineTrace::default();
    if s.contains_minus_identity() {
        return Ok((CanonResult::Zero, trace));
    }
    let n = g_init.degree();
    let mut labels = LabelBsgs::from_context(ctx);
    let mut configs = vec![g_init.clone()];
    for i in 0..n {
        let orbit = s.base_orbit(i);
        let minima = labels.orbit_minima(i);
        let least = configs
            .iter()
            .flat_map(|g| orbit.iter().map(|&j| minima[g.apply(j)]))
            .min()
            .expect("orbit contains the base point");
        labels.reorder_base(i, least)?;
        let reps = labels.transversal(i, least);
        let inverses: Vec<Option<SignedPerm>> = reps
            .iter()
            .map(|r| r.as_ref().map(SignedPerm::inverse))
            .collect();
        let mut next = Vec::new();
        for g in &configs {
            if let Some(d) = opts.deadline {
                if Instant::now() > d {
                    return Err(BaselineError::Deadline {
                        slot: i,
                        configs: next.len(),
                    });
                }
            }
            for &j in orbit {
                if let Some(l) = &inverses[g.apply(j)] {
                    let sj = s.coset_rep(i, j).expect("orbit point");
                    next.push(l.compose(g).compose(sj));
                }
            }
            if let Some(cap) = opts.max_configs {
                if next.len() > cap {
                    return Err(BaselineError::Budget {
                        slot: i,
                        configs: next.len(),
                    });
                }
            }
        }
        next.sort_unstable();
        next.dedup();
        // Sign twins sort next to each other.
        if next
            .windows(2)
            .any(|w| w[0].slot_images() == w[1].slot_images())
        {
            trace.sizes_after.push(next.len());
            return Ok((CanonResult::Zero, trace));
        }
        trace.sizes_after.push(next.len());
        configs = next;
    }
    Ok((CanonResult::Canonical(configs.swap_remove(0)), trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::label_context::{IndexClass, Metric};
    use crate::oracle;

    fn cyc(n: usize, s: &str) -> SignedPerm {
        SignedPerm::parse_cycles(n, s).unwrap()
    }

    fn three_pairs() -> LabelBsgs {
        let ctx = LabelContext::build(&[IndexClass::Dummy {
            pairs: 3,
            metric: Metric::Symmetric,
        }])
        .unwrap();
        LabelBsgs::from_context(&ctx)
    }

    #[test]
    fn reorder_by_conjugation() {
        let mut l = three_pairs();
        l.reorder_base(0, 2).unwrap();
        assert_eq!(&l.base()[..3], &[2, 3, 0]);
        let text: Vec<String> = l.generators().iter().map(|g| g.to_cycle_string()).collect();
        for want in ["+(3,4)", "+(1,2)", "+(5,6)", "+(1,3)(2,4)", "+(1,5)(2,6)"] {
            assert!(
                text.iter().any(|t| t == want),
                "{want} missing from {text:?}"
            );
        }
        let before = l.clone();
        l.reorder_base(0, 2).unwrap();
        assert_eq!(l.generators(), before.generators());
    }

    #[test]
    fn reorder_preserves_group() {
        let ctx = LabelContext::build(&[
            IndexClass::Free,
            IndexClass::Component { size: 3 },
            IndexClass::Dummy {
                pairs: 2,
                metric: Metric::None,
            },
        ])
        .unwrap();
        let mut l = LabelBsgs::from_context(&ctx);
        let want: std::collections::HashSet<_> = oracle::closure(8, l.generators(), 1000)
            .unwrap()
            .into_iter()
            .collect();
        // Upper legs sit in a different orbit from the lower legs.
        l.reorder_base(1, 7).unwrap();
        assert_eq!(l.base()[1], 7);
        l.reorder_base(2, 3).unwrap();
        let got: std::collections::HashSet<_> = oracle::closure(8, l.generators(), 1000)
            .unwrap()
            .into_iter()
            .collect();
        assert_eq!(got, want);
    }

    #[test]
    fn trivial_problem_is_unchanged() {
        let ctx = LabelContext::build(&[IndexClass::Free, IndexClass::Free]).unwrap();
        let g = cyc(2, "+(1,2)");
        let r = butler_portugal(&g, &Bsgs::trivial(2), &ctx);
        assert_eq!(r, CanonResult::Canonical(g));
    }

    #[test]
    fn symmetric_against_antisymmetric_vanishes() {
        // M^{ab} A_{ab}: slots 1,2 symmetric, 3,4 antisymmetric.
        let ctx = LabelContext::build(&[IndexClass::Dummy {
            pairs: 2,
            metric: Metric::Symmetric,
        }])
        .unwrap();
        let s = Bsgs::schreier_sims(4, &[cyc(4, "+(1,2)"), cyc(4, "-(3,4)")]).unwrap();
        let g = SignedPerm::from_slot_images(&[1, 3, 0, 2], crate::Sign::Plus).unwrap();
        assert_eq!(butler_portugal(&g, &s, &ctx), CanonResult::Zero);
    }

    #[test]
    fn deadline_aborts() {
        let ctx = LabelContext::build(&[IndexClass::Dummy {
            pairs: 2,
            metric: Metric::Symmetric,
        }])
        .unwrap();
        let opts = BaselineOptions {
            deadline: Some(Instant::now() - std::time::Duration::from_secs(1)),
            max_configs: None,
        };
        let g = SignedPerm::identity(4);
        assert!(matches!(
            butler_portugal_traced(&g, &Bsgs::trivial(4), &ctx, opts),
            Err(BaselineError::Deadline { .. })
        ));
    }
}
