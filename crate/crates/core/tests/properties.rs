use std::collections::HashSet;

use proptest::prelude::*;

use tensor_canon::bench::{generate, Family};
use tensor_canon::canon_baseline::butler_portugal;
use tensor_canon::canon_fast::{canonicalize, canonicalize_traced, FastOptions};
use tensor_canon::oracle::closure;
use tensor_canon::tensor_frontend::render_config;
use tensor_canon::{build_problem, render, Bsgs, CanonResult, Sign, SignedPerm, TensorMonomial};

fn signed_perm(n: usize) -> impl Strategy<Value = SignedPerm> {
    (
        Just((0..n as u32).collect::<Vec<u32>>()).prop_shuffle(),
        any::<bool>(),
    )
        .prop_map(|(imgs, minus)| {
            SignedPerm::from_slot_images(&imgs, if minus { Sign::Minus } else { Sign::Plus })
                .unwrap()
        })
}

fn group(max_n: usize) -> impl Strategy<Value = (usize, Vec<SignedPerm>)> {
    (2..=max_n).prop_flat_map(|n| (Just(n), proptest::collection::vec(signed_perm(n), 0..3)))
}

/// A family case small enough for every engine.
fn small_case() -> impl Strategy<Value = (Family, usize, u64)> {
    (0..Family::ALL.len(), any::<u64>()).prop_map(|(f, seed)| {
        let family = Family::ALL[f];
        let size = match family.slots(1) {
            1 => 6,
            2 => 4,
            _ => 2,
        };
        (family, size, seed)
    })
}

/// Random word in the generators, applied `len` times.
fn word(n: usize, gens: &[SignedPerm], picks: &[usize]) -> SignedPerm {
    let mut w = SignedPerm::identity(n);
    if gens.is_empty() {
        return w;
    }
    for &k in picks {
        w = w.compose(&gens[k % gens.len()]);
    }
    w
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bsgs_order_is_closure_size((n, gens) in group(7)) {
        let all = closure(n, &gens, 20_000).unwrap();
        prop_assume!(all.len() <= 5040 * 2);
        let b = Bsgs::schreier_sims(n, &gens).unwrap();
        prop_assert_eq!(b.order().to_string(), all.len().to_string());
        let set: HashSet<_> = all.iter().collect();
        for g in &all {
            prop_assert!(b.contains(g));
        }
        prop_assert_eq!(set.len(), all.len());
    }

    #[test]
    fn coset_reps_are_members((n, gens) in group(7)) {
        let b = Bsgs::schreier_sims(n, &gens).unwrap();
        for lv in 0..b.depth() {
            let base = b.base_orbit(lv)[0];
            for &pt in b.base_orbit(lv) {
                let r = b.coset_rep(lv, pt).unwrap();
                prop_assert!(b.contains(r));
                prop_assert_eq!(r.apply(base), pt);
            }
        }
    }

    #[test]
    fn sign_is_a_homomorphism(a in signed_perm(6), b in signed_perm(6)) {
        prop_assert_eq!(a.compose(&b).sign(), a.sign() * b.sign());
        prop_assert_eq!(a.compose(&a.inverse()), SignedPerm::identity(6));
    }

    #[test]
    fn propagation_invariants_hold((family, size, seed) in small_case()) {
        let case = generate(family, size, seed).unwrap();
        let p = &case.problem;
        let opts = FastOptions { trace: true, ..FastOptions::default() };
        let (_, t) = canonicalize_traced(&p.g_init, &p.slot_group, &p.ctx, &p.subsets, opts).unwrap();
        prop_assert_eq!(t.violation, None);
    }

    #[test]
    fn canonical_form_is_a_fixed_point((family, size, seed) in small_case()) {
        let case = generate(family, size, seed).unwrap();
        let p = &case.problem;
        let fast = canonicalize(&p.g_init, &p.slot_group, &p.ctx, &p.subsets);
        prop_assert_eq!(&fast, &butler_portugal(&p.g_init, &p.slot_group, &p.ctx));
        let text = render(&fast, p);
        if fast.is_zero() {
            prop_assert_eq!(text, "0");
            return Ok(());
        }
        let m = TensorMonomial::parse(&text, &case.registry).unwrap();
        let q = build_problem(&m, &case.registry).unwrap();
        // Parsing the rendered form and rendering again changes nothing.
        let again = TensorMonomial::parse(&render_config(&q.g_init, &q), &case.registry).unwrap();
        prop_assert_eq!(&again, &m);
        for r in [
            canonicalize(&q.g_init, &q.slot_group, &q.ctx, &q.subsets),
            butler_portugal(&q.g_init, &q.slot_group, &q.ctx),
        ] {
            prop_assert_eq!(render(&r, &q), text.clone());
        }
    }

    #[test]
    fn result_depends_only_on_the_double_coset(
        (family, size, seed) in small_case(),
        lw in proptest::collection::vec(any::<usize>(), 0..8),
        sw in proptest::collection::vec(any::<usize>(), 0..8),
    ) {
        let case = generate(family, size, seed).unwrap();
        let p = &case.problem;
        let n = p.g_init.degree();
        let l = word(n, &p.ctx.generators(), &lw);
        let s = word(n, p.slot_group.strong_generators(), &sw);
        let moved = l.compose(&p.g_init).compose(&s);
        let want = canonicalize(&p.g_init, &p.slot_group, &p.ctx, &p.subsets);
        let got = canonicalize(&moved, &p.slot_group, &p.ctx, &p.subsets);
        prop_assert_eq!(&got, &want);
        prop_assert_eq!(butler_portugal(&moved, &p.slot_group, &p.ctx), want.clone());
        if let CanonResult::Canonical(c) = &want {
            prop_assert_eq!(canonicalize(c, &p.slot_group, &p.ctx, &p.subsets), want.clone());
        }
    }
}
