//! Canonicalization with an implicit label group and propagated symmetries.
//!
//! The label group lives in the Values and Label-Groups arrays of a
//! [`LabelContext`]. When labels of equal value sit in a totally
//! (anti)symmetric slot subset, only one of them is expanded; the subset is
//! recorded in a slot-indexed array of propagated symmetries so that later
//! slots know which exchanges are still free. Odd entries mark the original
//! sets, even entries the partner legs of dummies in them.

use std::collections::HashMap;
use std::time::Instant;

use thiserror::Error;

use crate::label_context::{GroupCode, LabelContext, LabelError};
use crate::perm_group::{Bsgs, SymmetricSubsets};
use crate::signed_perm::{Sign, SignedPerm};
use crate::CanonResult;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FastError {
    #[error("deadline passed at slot {slot}")]
    Deadline { slot: usize },
    #[error("configuration budget exceeded at slot {slot} ({configs} configurations)")]
    Budget { slot: usize, configs: usize },
    #[error(transparent)]
    Label(#[from] LabelError),
}

/// A configuration together with the slot action that produced it from the
/// initial configuration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Configuration {
    pub g: SignedPerm,
    pub s: SignedPerm,
}

/// Propagated symmetries, indexed by original slot (read through `s`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropagationState {
    pub prop: Vec<i32>,
    next_odd: i32,
    /// Odd numbers handed out so far, with sign.
    pub issued: Vec<i32>,
    /// Subset (as seen from original slots) each odd number was issued for.
    origin: HashMap<i32, i32>,
}

impl PropagationState {
    pub fn new(n: usize) -> PropagationState {
        PropagationState {
            prop: vec![0; n],
            next_odd: 1,
            issued: Vec::new(),
            origin: HashMap::new(),
        }
    }

    fn next_odd(&mut self, subset: i32) -> i32 {
        let v = sgn(subset) * self.next_odd;
        self.next_odd += 2;
        self.issued.push(v);
        self.origin.insert(v, subset);
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LeastValueEntry {
    /// Index of the parent configuration.
    pub parent: usize,
    /// Slot in the slot-stabilizer orbit.
    pub p: usize,
    /// Slot actually holding the least-value label.
    pub q: usize,
}

fn sgn(x: i32) -> i32 {
    x.signum()
}

fn is_even_nonzero(x: i32) -> bool {
    x != 0 && x % 2 == 0
}

/// Least value reachable at slot `i` across all configurations, and every
/// (configuration, slot) that reaches it.
pub fn get_least_value_instances(
    i: usize,
    orbit: &[usize],
    configs: &[Configuration],
    ctx: &LabelContext,
    prop: &[i32],
) -> (usize, Vec<LeastValueEntry>) {
    let n = ctx.len();
    let mut least = usize::MAX;
    let mut entries = Vec::new();
    let mut reach: HashMap<i32, (usize, usize)> = HashMap::new();
    for (ci, c) in configs.iter().enumerate() {
        // For every even entry, the least value held by its slots from `i`
        // on and the first slot holding it.
        reach.clear();
        for k in i..n {
            let e = prop[c.s.apply(k)];
            if is_even_nonzero(e) {
                let v = ctx.value(c.g.apply(k));
                let slot = reach.entry(e).or_insert((v, k));
                if v < slot.0 {
                    *slot = (v, k);
                }
            }
        }
        for &p in orbit {
            let mut value = ctx.value(c.g.apply(p));
            let mut q = p;
            let e = prop[c.s.apply(p)];
            if is_even_nonzero(e) {
                let (v, k) = reach[&e];
                if v < value {
                    value = v;
                    q = k;
                }
            }
            if value < least {
                least = value;
                entries.clear();
            }
            if value == least {
                entries.push(LeastValueEntry { parent: ci, p, q });
            }
        }
    }
    (least, entries)
}

fn remove_singletons(prop: &mut [i32]) {
    let mut count: HashMap<i32, usize> = HashMap::new();
    for &x in prop.iter().filter(|&&x| x != 0) {
        *count.entry(x).or_default() += 1;
    }
    for x in prop.iter_mut() {
        if *x != 0 && count[x] == 1 {
            *x = 0;
        }
    }
}

/// Subsets whose least-value labels include both legs of some dummy pair
/// together with a leg whose partner lies elsewhere. Skipping members of
/// such a set does not induce a group of partner exchanges, so these sets
/// are expanded in full instead of propagated.
pub fn closed_subsets(
    lvs: &[LeastValueEntry],
    config: &Configuration,
    ctx: &LabelContext,
    subsets: &SymmetricSubsets,
) -> Vec<i32> {
    let g = &config.g;
    let mut ids: Vec<i32> = lvs
        .iter()
        .map(|e| subsets.entries[e.q])
        .filter(|&x| x != 0)
        .collect();
    ids.sort_unstable();
    ids.dedup();
    ids.retain(|&subset| {
        let members: Vec<usize> = lvs
            .iter()
            .filter(|e| subsets.entries[e.q] == subset)
            .map(|e| g.apply(e.q))
            .collect();
        let paired = |x: &usize| ctx.partner(*x).is_some_and(|m| members.contains(&m));
        let dummies = members.iter().filter(|x| ctx.partner(**x).is_some());
        let inside = dummies.clone().filter(|x| paired(x)).count();
        inside > 0 && inside < dummies.count()
    });
    ids
}

/// Records the (anti)symmetric sets formed by the least-value labels of one
/// configuration, and the partner legs of the dummies among them.
pub fn update_propagated_symmetries(
    lvs: &[LeastValueEntry],
    config: &Configuration,
    ctx: &LabelContext,
    subsets: &SymmetricSubsets,
    state: &mut PropagationState,
) {
    let (g, s) = (&config.g, &config.s);
    let old = state.prop.clone();
    let mut next = old.clone();
    let ginv = g.inverse();
    // Labels of one subset form one set, so they share one odd number.
    let mut issued_for: HashMap<i32, i32> = HashMap::new();
    let closed = closed_subsets(lvs, config, ctx, subsets);
    for e in lvs {
        let q = e.q;
        let label = g.apply(q);
        let group = ctx.group(label);
        let subset = subsets.entries[q];
        if group == GroupCode::None
            || subset == 0
            || old[s.apply(q)] != 0
            || closed.contains(&subset)
        {
            continue;
        }
        let at_q = s.apply(q);
        let cur = next[at_q];
        let entry = if is_even_nonzero(cur) {
            // A partner leg joins the set it was propagated from only when
            // it shares that set's slot subset. Otherwise the even entry
            // already states the whole symmetry.
            let odd = sgn(cur) * (cur.abs() - 1);
            if state.origin.get(&odd) != Some(&subsets.entries[at_q]) {
                continue;
            }
            odd
        } else {
            *issued_for
                .entry(subset)
                .or_insert_with(|| state.next_odd(subsets.entries[at_q]))
        };
        next[at_q] = entry;
        if group.is_dummy() {
            let partner = ctx.partner(label).expect("dummy partner");
            let at = s.apply(ginv.apply(partner));
            let pe = sgn(entry) * (entry.abs() + 1);
            if next[at] == 0 || pe.abs() < next[at].abs() {
                next[at] = pe;
            }
        }
    }
    remove_singletons(&mut next);
    state.prop = next;
}

/// Early detection of vanishing monomials from the propagated symmetries.
pub fn zero_due_to_propagated_symmetries(
    config: &Configuration,
    ctx: &LabelContext,
    subsets: &SymmetricSubsets,
    prop: &[i32],
) -> bool {
    let (g, s) = (&config.g, &config.s);
    let n = ctx.len();
    let mut seen = vec![0i32; n];
    // Slots seen per (even entry, subset).
    let mut even_sets: HashMap<(i32, i32), usize> = HashMap::new();
    for p in 0..n {
        let label = g.apply(p);
        let sym = prop[s.apply(p)];
        if sym == 0 {
            continue;
        }
        seen[label] = sym;
        let group = ctx.group(label);
        if group == GroupCode::Component && sym < 0 {
            return true;
        }
        if !group.is_dummy() {
            continue;
        }
        let subset = subsets.entries[p];
        if is_even_nonzero(sym) && subset != 0 {
            // Two legs carrying the same propagated symmetry inside one
            // subset of the opposite kind.
            let k = even_sets.entry((sym, subset)).or_default();
            *k += 1;
            if *k >= 2 && sgn(sym) != sgn(subset) {
                return true;
            }
        }
        let partner = ctx.partner(label).expect("dummy partner");
        if seen[partner] == sym
            && ((group == GroupCode::SDummy && sym < 0) || (group == GroupCode::ADummy && sym > 0))
        {
            return true;
        }
    }
    false
}

/// Expands one configuration, keeping a single representative per
/// recorded set inside each slot subset.
#[allow(clippy::too_many_arguments)]
pub fn append_non_redundant_instances(
    next: &mut Vec<Configuration>,
    lvs: &[LeastValueEntry],
    config: &Configuration,
    least: usize,
    s_group: &Bsgs,
    i: usize,
    ctx: &LabelContext,
    subsets: &SymmetricSubsets,
    prop: &[i32],
) -> Result<(), FastError> {
    let (g, s) = (&config.g, &config.s);
    let n = ctx.len();
    // One representative per recorded set inside a subset. Labels left out
    // of every set carry no exchange, so they are always expanded.
    let mut visited: Vec<(i32, i32)> = Vec::new();
    for e in lvs {
        let (p, q) = (e.p, e.q);
        let subset = subsets.entries[p];
        let key = prop[s.apply(q)];
        if subset != 0 && key != 0 {
            if visited.contains(&(subset, key)) {
                continue;
            }
            visited.push((subset, key));
        }
        let label = g.apply(q);
        let sym = prop[s.apply(q)];
        let mut l = ctx.label_permutation_from_group(label, least)?;
        if sym != 0 && p != q {
            // Exchange the label at q with the one at p first.
            let sign = if sym < 0 { Sign::Minus } else { Sign::Plus };
            let swap = SignedPerm::from_signed_cycles(n, sign, &[vec![label + 1, g.apply(p) + 1]])
                .expect("valid transposition");
            l = l.compose(&swap);
        }
        let st = s_group.coset_rep(i, p).expect("orbit point");
        next.push(Configuration {
            g: l.compose(g).compose(st),
            s: s.compose(st),
        });
    }
    Ok(())
}

/// Limits and instrumentation for one run.
#[derive(Debug, Clone, Copy, Default)]
pub struct FastOptions {
    pub deadline: Option<Instant>,
    pub max_configs: Option<usize>,
    /// Record propagated symmetries after every slot.
    pub trace: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FastTrace {
    pub sizes_after: Vec<usize>,
    /// Propagated symmetries after each slot (traced runs only).
    pub prop_snapshots: Vec<Vec<i32>>,
    /// First violation of the propagated-symmetry invariants, if any.
    pub violation: Option<String>,
}

impl FastTrace {
    pub fn max_configs(&self) -> usize {
        self.sizes_after.iter().copied().max().unwrap_or(1)
    }
}

/// Checks the invariants of the propagated-symmetry array: no singletons,
/// one sign per absolute value, odd entries handed out in increasing order,
/// and every even entry one above an issued odd number of the same sign.
pub fn check_propagation(state: &PropagationState) -> Result<(), String> {
    let mut count: HashMap<i32, usize> = HashMap::new();
    for &x in state.prop.iter().filter(|&&x| x != 0) {
        *count.entry(x).or_default() += 1;
    }
    for (&x, &c) in &count {
        if c < 2 {
            return Err(format!("singleton entry {x}"));
        }
        if count.contains_key(&-x) {
            return Err(format!("entry {} used with both signs", x.abs()));
        }
        let origin = if x % 2 == 0 {
            sgn(x) * (x.abs() - 1)
        } else {
            x
        };
        if !state.issued.contains(&origin) {
            return Err(format!("entry {x} has no issued odd origin"));
        }
    }
    if state.issued.windows(2).any(|w| w[0].abs() >= w[1].abs())
        || state.issued.iter().any(|x| x % 2 == 0)
    {
        return Err(format!(
            "odd numbers issued out of order: {:?}",
            state.issued
        ));
    }
    Ok(())
}

pub fn canonicalize(
    g_init: &SignedPerm,
    s: &Bsgs,
    ctx: &LabelContext,
    subsets: &SymmetricSubsets,
) -> CanonResult {
    canonicalize_traced(g_init, s, ctx, subsets, FastOptions::default())
        .expect("unlimited run")
        .0
}

pub fn canonicalize_traced(
    g_init: &SignedPerm,
    s_group: &Bsgs,
    ctx: &LabelContext,
    subsets: &SymmetricSubsets,
    opts: FastOptions,
) -> Result<(CanonResult, FastTrace), FastError> {
    let mut trace = FastTrace::default();
    if subsets.inconsistent || s_group.contains_minus_identity() {
        return Ok((CanonResult::Zero, trace));
    }
    let n = g_init.degree();
    let mut ctx = ctx.clone();
    let mut state = PropagationState::new(n);
    let mut configs = vec![Configuration {
        g: g_init.clone(),
        s: SignedPerm::identity(n),
    }];
    for i in 0..n {
        if let Some(d) = opts.deadline {
            if Instant::now() > d {
                return Err(FastError::Deadline { slot: i });
            }
        }
        let orbit = s_group.base_orbit(i);
        let (least, entries) = get_least_value_instances(i, orbit, &configs, &ctx, &state.prop);
        let mut next = Vec::new();
        let mut start = 0;
        for (ci, config) in configs.iter().enumerate() {
            let mut end = start;
            while end < entries.len() && entries[end].parent == ci {
                end += 1;
            }
            let lvs = &entries[start..end];
            start = end;
            update_propagated_symmetries(lvs, config, &ctx, subsets, &mut state);
            if opts.trace && trace.violation.is_none() {
                if let Err(v) = check_propagation(&state) {
                    trace.violation = Some(format!("slot {}: {v}", i + 1));
                }
            }
            if zero_due_to_propagated_symmetries(config, &ctx, subsets, &state.prop) {
                trace.sizes_after.push(0);
                if opts.trace {
                    trace.prop_snapshots.push(state.prop.clone());
                }
                return Ok((CanonResult::Zero, trace));
            }
            append_non_redundant_instances(
                &mut next,
                lvs,
                config,
                least,
                s_group,
                i,
                &ctx,
                subsets,
                &state.prop,
            )?;
            if let Some(cap) = opts.max_configs {
                if next.len() > cap {
                    return Err(FastError::Budget {
                        slot: i,
                        configs: next.len(),
                    });
                }
            }
        }
        ctx.update_in_place(least)?;
        next.sort_unstable_by(|a, b| a.g.cmp(&b.g).then_with(|| a.s.cmp(&b.s)));
        next.dedup_by(|b, a| a.g == b.g);
        trace.sizes_after.push(next.len());
        if opts.trace {
            trace.prop_snapshots.push(state.prop.clone());
        }
        if next
            .windows(2)
            .any(|w| w[0].g.slot_images() == w[1].g.slot_images())
        {
            return Ok((CanonResult::Zero, trace));
        }
        configs = next;
    }
    Ok((CanonResult::Canonical(configs.swap_remove(0).g), trace))
}
