//! Ground truth by enumeration. Slow on purpose: nothing here shares code
//! with either engine beyond the permutation type and the group chain.

use std::collections::{HashMap, HashSet};

use num_bigint::BigUint;
use thiserror::Error;

use crate::label_context::{GroupCode, LabelContext};
use crate::perm_group::Bsgs;
use crate::signed_perm::{Sign, SignedPerm};
use crate::CanonResult;

pub const DEFAULT_CAP: usize = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("group of order {order} exceeds the enumeration cap {cap}")]
    CapExceeded { order: String, cap: usize },
    #[error("search space {size} exceeds the cap {cap}")]
    SearchTooLarge { size: String, cap: usize },
}

/// Lists every element of the group as a product of one coset
/// representative per level.
pub fn enumerate_group(bsgs: &Bsgs, cap: usize) -> Result<Vec<SignedPerm>, OracleError> {
    if *bsgs.order() > BigUint::from(cap) {
        return Err(OracleError::CapExceeded {
            order: bsgs.order().to_string(),
            cap,
        });
    }
    let n = bsgs.degree();
    let mut out = vec![SignedPerm::identity(n)];
    // Deepest level first so that every element reads r_0 r_1 ... r_k.
    for lv in (0..bsgs.depth()).rev() {
        let level = bsgs.level(lv);
        let mut next = Vec::with_capacity(out.len() * level.orbit().len());
        for &pt in level.orbit() {
            let r = level.rep(pt).expect("orbit point");
            for x in &out {
                next.push(r.compose(x));
            }
        }
        out = next;
    }
    Ok(out)
}

/// Closure of a generating set by breadth-first multiplication.
pub fn closure(n: usize, gens: &[SignedPerm], cap: usize) -> Result<Vec<SignedPerm>, OracleError> {
    let id = SignedPerm::identity(n);
    let mut seen = HashSet::from([id.clone()]);
    let mut out = vec![id];
    let mut k = 0;
    while k < out.len() {
        for g in gens {
            let y = g.compose(&out[k]);
            if seen.insert(y.clone()) {
                if out.len() >= cap {
                    return Err(OracleError::CapExceeded {
                        order: format!("more than {cap}"),
                        cap,
                    });
                }
                out.push(y);
            }
        }
        k += 1;
    }
    Ok(out)
}

/// Every label permutation allowed by the context.
pub fn enumerate_label_group(
    ctx: &LabelContext,
    cap: usize,
) -> Result<Vec<SignedPerm>, OracleError> {
    closure(ctx.len(), &ctx.generators(), cap)
}

/// Least element of the double coset `L g S`, comparing slot images first.
/// The tensor vanishes when that slot image occurs with both signs.
pub fn brute_force_canonicalize(
    g: &SignedPerm,
    slot_group: &[SignedPerm],
    label_group: &[SignedPerm],
) -> CanonResult {
    let n = g.degree();
    let mut best: Option<Vec<u32>> = None;
    let mut signs = (false, false);
    let mut cand = vec![0u32; n];
    for s in slot_group {
        let h = g.compose(s);
        let hs = h.slot_images();
        for l in label_group {
            let li = l.images();
            // Early exit on the first slot that is already larger.
            let mut ord = std::cmp::Ordering::Equal;
            if let Some(b) = &best {
                for k in 0..n {
                    let v = li[hs[k] as usize];
                    cand[k] = v;
                    if ord == std::cmp::Ordering::Equal {
                        ord = v.cmp(&b[k]);
                        if ord == std::cmp::Ordering::Greater {
                            break;
                        }
                    }
                }
            } else {
                for k in 0..n {
                    cand[k] = li[hs[k] as usize];
                }
                ord = std::cmp::Ordering::Less;
            }
            let sign = l.sign() * h.sign();
            match ord {
                std::cmp::Ordering::Greater => {}
                std::cmp::Ordering::Less => {
                    best = Some(cand.clone());
                    signs = (sign == Sign::Plus, sign == Sign::Minus);
                }
                std::cmp::Ordering::Equal => {
                    if sign == Sign::Plus {
                        signs.0 = true;
                    } else {
                        signs.1 = true;
                    }
                }
            }
        }
    }
    let best = best.expect("groups contain the identity");
    if signs.0 && signs.1 {
        CanonResult::Zero
    } else {
        let sign = if signs.1 { Sign::Minus } else { Sign::Plus };
        CanonResult::Canonical(SignedPerm::from_slot_images(&best, sign).expect("bijection"))
    }
}

/// Least relabelling of a fixed slot arrangement: scanning slots left to
/// right, each index takes the next unused label of its class. Dummies
/// are placed as whole pairs, the leg met first becoming the lower leg
/// when a metric allows the swap.
pub fn relabel_least(h: &SignedPerm, ctx: &LabelContext) -> SignedPerm {
    let n = h.degree();
    let mut map: Vec<u32> = vec![u32::MAX; n];
    let mut next: HashMap<usize, usize> = HashMap::new();
    let mut sign = h.sign();
    for k in 0..n {
        let x = h.apply(k);
        if map[x] != u32::MAX {
            continue;
        }
        let v = ctx.value(x);
        match ctx.group(x) {
            GroupCode::None => map[x] = x as u32,
            GroupCode::Component => {
                let c = next.entry(v).or_insert(v);
                map[x] = *c as u32;
                *c += 1;
            }
            g @ (GroupCode::SDummy | GroupCode::ADummy | GroupCode::LDummy) => {
                let c = next.entry(v).or_insert(v);
                let p = *c;
                *c += 2;
                let partner = ctx.partner(x).expect("dummy partner");
                map[x] = p as u32;
                map[partner] = p as u32 + 1;
                let upper = (x - v) % 2 == 1;
                if g == GroupCode::ADummy && upper {
                    sign = -sign;
                }
            }
            GroupCode::UDummy => {
                let c = next.entry(v - 1).or_insert(v - 1);
                let p = *c;
                *c += 2;
                let partner = ctx.partner(x).expect("dummy partner");
                map[x] = p as u32 + 1;
                map[partner] = p as u32;
            }
        }
    }
    let slots: Vec<u32> = (0..n).map(|k| map[h.apply(k)]).collect();
    SignedPerm::from_slot_images(&slots, sign).expect("relabelling is a bijection")
}

/// Exact canonical form enumerating only the slot group; the label side is
/// solved by [`relabel_least`].
pub fn canonicalize_by_relabel(
    g: &SignedPerm,
    slot_group: &[SignedPerm],
    ctx: &LabelContext,
) -> CanonResult {
    let mut best: Option<SignedPerm> = None;
    let mut zero = false;
    for s in slot_group {
        let c = relabel_least(&g.compose(s), ctx);
        match &best {
            None => best = Some(c),
            Some(b) => match c.slot_images().cmp(b.slot_images()) {
                std::cmp::Ordering::Less => {
                    best = Some(c);
                    zero = false;
                }
                std::cmp::Ordering::Equal if c.sign() != b.sign() => zero = true,
                _ => {}
            },
        }
    }
    if zero {
        CanonResult::Zero
    } else {
        CanonResult::Canonical(best.expect("slot group contains the identity"))
    }
}

/// Ground truth for one monomial. Uses the full double enumeration when
/// `|S| |L|` fits under `cap`, otherwise the relabelling shortcut as long as
/// `|S|` alone fits.
pub fn oracle_canonicalize(
    g: &SignedPerm,
    slot_bsgs: &Bsgs,
    ctx: &LabelContext,
    cap: usize,
) -> Result<CanonResult, OracleError> {
    let slot_group = enumerate_group(slot_bsgs, cap)?;
    match enumerate_label_group(ctx, cap) {
        Ok(labels) if slot_group.len().saturating_mul(labels.len()) <= cap => {
            Ok(brute_force_canonicalize(g, &slot_group, &labels))
        }
        _ => Ok(canonicalize_by_relabel(g, &slot_group, ctx)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::label_context::{IndexClass, Metric};

    fn cyc(n: usize, s: &str) -> SignedPerm {
        SignedPerm::parse_cycles(n, s).unwrap()
    }

    #[test]
    fn enumeration_matches_order() {
        let b = Bsgs::schreier_sims(
            4,
            &[cyc(4, "-(1,2)"), cyc(4, "+(1,3)(2,4)"), cyc(4, "-(3,4)")],
        )
        .unwrap();
        let all = enumerate_group(&b, 100).unwrap();
        assert_eq!(all.len(), 8);
        let set: HashSet<_> = all.iter().cloned().collect();
        assert_eq!(set.len(), 8);
        let cl = closure(4, b.strong_generators(), 100).unwrap();
        assert_eq!(cl.into_iter().collect::<HashSet<_>>(), set);
    }

    #[test]
    fn cap_is_enforced() {
        let b = Bsgs::schreier_sims(6, &[cyc(6, "(1,2)"), cyc(6, "(1,2,3,4,5,6)")]).unwrap();
        assert!(matches!(
            enumerate_group(&b, 100),
            Err(OracleError::CapExceeded { .. })
        ));
        assert!(closure(6, b.strong_generators(), 100).is_err());
        assert_eq!(enumerate_group(&b, 720).unwrap().len(), 720);
    }

    #[test]
    fn label_group_sizes() {
        let ctx = LabelContext::build(&[IndexClass::Dummy {
            pairs: 3,
            metric: Metric::Symmetric,
        }])
        .unwrap();
        assert_eq!(enumerate_label_group(&ctx, 1000).unwrap().len(), 48);
        let ctx = LabelContext::build(&[IndexClass::Dummy {
            pairs: 3,
            metric: Metric::None,
        }])
        .unwrap();
        assert_eq!(enumerate_label_group(&ctx, 1000).unwrap().len(), 6);
    }

    #[test]
    fn antisymmetric_trace_vanishes() {
        // A_{a}^{a} with A antisymmetric.
        let ctx = LabelContext::build(&[IndexClass::Dummy {
            pairs: 1,
            metric: Metric::Symmetric,
        }])
        .unwrap();
        let s = enumerate_group(&Bsgs::schreier_sims(2, &[cyc(2, "-(1,2)")]).unwrap(), 10).unwrap();
        let l = enumerate_label_group(&ctx, 10).unwrap();
        let g = SignedPerm::identity(2);
        assert_eq!(brute_force_canonicalize(&g, &s, &l), CanonResult::Zero);
        assert_eq!(canonicalize_by_relabel(&g, &s, &ctx), CanonResult::Zero);
    }

    #[test]
    fn relabel_agrees_with_full_enumeration() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let metrics = [Metric::Symmetric, Metric::Antisymmetric, Metric::None];
        for trial in 0..200 {
            let classes = vec![
                IndexClass::Free,
                IndexClass::Component {
                    size: 1 + trial % 2,
                },
                IndexClass::Dummy {
                    pairs: 1 + trial % 3,
                    metric: metrics[trial % 3],
                },
            ];
            let ctx = LabelContext::build(&classes).unwrap();
            let n = ctx.len();
            let mut imgs: Vec<u32> = (0..n as u32).collect();
            for i in (1..n).rev() {
                imgs.swap(i, rng.gen_range(0..=i));
            }
            let g = SignedPerm::from_slot_images(&imgs, Sign::Plus).unwrap();
            let gens = match trial % 4 {
                0 => vec![],
                1 => vec![cyc(n, "-(1,2)")],
                2 => vec![cyc(n, "+(1,2)"), cyc(n, "+(2,3)")],
                _ => vec![cyc(n, "-(1,2)(3,4)")],
            };
            let s = enumerate_group(&Bsgs::schreier_sims(n, &gens).unwrap(), 1000).unwrap();
            let l = enumerate_label_group(&ctx, 1000).unwrap();
            assert_eq!(
                brute_force_canonicalize(&g, &s, &l),
                canonicalize_by_relabel(&g, &s, &ctx),
                "trial {trial}: {g}"
            );
        }
    }
}
