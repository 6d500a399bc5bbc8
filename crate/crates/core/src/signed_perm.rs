//! Array-form signed permutations.
//!
//! A permutation of degree `n` acts on `n + 2` points. Points `0..n` are slots
//! or labels, and the last two points form the sign pair: when they are
//! swapped the permutation carries a minus sign. Storage is 0-based; every
//! textual form (cycles, arrays) is 1-based.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Mul, Neg};
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PermError {
    #[error("degree mismatch: {0} vs {1}")]
    DegreeMismatch(usize, usize),
    #[error("point {point} out of range 1..={max}")]
    PointOutOfRange { point: usize, max: usize },
    #[error("point {0} appears in more than one cycle")]
    OverlappingCycles(usize),
    #[error("image array is not a bijection")]
    NotBijection,
    #[error("sign pair is not closed")]
    OpenSignPair,
    #[error("cannot parse permutation `{text}`: {reason}")]
    Parse { text: String, reason: String },
}

/// Overall sign carried by a signed permutation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn is_minus(self) -> bool {
        self == Sign::Minus
    }

    pub fn as_i32(self) -> i32 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn of_i64(x: i64) -> Sign {
        if x < 0 {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }
}

impl Mul for Sign {
    type Output = Sign;
    fn mul(self, rhs: Sign) -> Sign {
        if self == rhs {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }
}

impl Neg for Sign {
    type Output = Sign;
    fn neg(self) -> Sign {
        self * Sign::Minus
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        })
    }
}

/// A permutation of `n + 2` points whose last two points track the sign.
///
/// Ordering is lexicographic on the full image array, so `+g` and `-g` sort
/// next to each other.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SignedPerm {
    images: Vec<u32>,
}

impl SignedPerm {
    pub fn identity(n: usize) -> SignedPerm {
        SignedPerm {
            images: (0..n as u32 + 2).collect(),
        }
    }

    /// The identity on the slot points combined with the given sign.
    pub fn signed_identity(n: usize, sign: Sign) -> SignedPerm {
        let mut p = SignedPerm::identity(n);
        if sign.is_minus() {
            p.images.swap(n, n + 1);
        }
        p
    }

    /// Builds from a full 0-based image array of length `n + 2`.
    pub fn from_images(images: Vec<u32>) -> Result<SignedPerm, PermError> {
        if images.len() < 2 {
            return Err(PermError::NotBijection);
        }
        let m = images.len();
        let mut seen = vec![false; m];
        for &x in &images {
            let x = x as usize;
            if x >= m || seen[x] {
                return Err(PermError::NotBijection);
            }
            seen[x] = true;
        }
        let (a, b) = (images[m - 2] as usize, images[m - 1] as usize);
        if a < m - 2 || b < m - 2 {
            return Err(PermError::OpenSignPair);
        }
        Ok(SignedPerm { images })
    }

    /// Builds from 0-based slot images plus a sign.
    pub fn from_slot_images(slots: &[u32], sign: Sign) -> Result<SignedPerm, PermError> {
        let n = slots.len() as u32;
        let mut images = slots.to_vec();
        match sign {
            Sign::Plus => images.extend([n, n + 1]),
            Sign::Minus => images.extend([n + 1, n]),
        }
        SignedPerm::from_images(images)
    }

    /// Builds from disjoint 1-based cycles on the points `1..=n`.
    pub fn from_signed_cycles(
        n: usize,
        sign: Sign,
        cycles: &[Vec<usize>],
    ) -> Result<SignedPerm, PermError> {
        let mut p = SignedPerm::signed_identity(n, sign);
        let mut used = vec![false; n];
        for cycle in cycles {
            for &pt in cycle {
                if pt == 0 || pt > n {
                    return Err(PermError::PointOutOfRange { point: pt, max: n });
                }
                if used[pt - 1] {
                    return Err(PermError::OverlappingCycles(pt));
                }
                used[pt - 1] = true;
            }
            for (k, &pt) in cycle.iter().enumerate() {
                let next = cycle[(k + 1) % cycle.len()];
                p.images[pt - 1] = (next - 1) as u32;
            }
        }
        Ok(p)
    }

    /// Parses signed cycle notation such as `-(1,2)(3,4)` or `+()`.
    pub fn parse_cycles(n: usize, text: &str) -> Result<SignedPerm, PermError> {
        let err = |reason: &str| PermError::Parse {
            text: text.to_string(),
            reason: reason.to_string(),
        };
        let t = text.trim();
        let (sign, rest) = match t.chars().next() {
            Some('+') => (Sign::Plus, &t[1..]),
            Some('-') => (Sign::Minus, &t[1..]),
            _ => (Sign::Plus, t),
        };
        let mut cycles = Vec::new();
        let mut rest = rest.trim_start();
        while !rest.is_empty() {
            if !rest.starts_with('(') {
                return Err(err("expected `(`"));
            }
            let close = rest.find(')').ok_or_else(|| err("unclosed cycle"))?;
            let body = rest[1..close].trim();
            if !body.is_empty() {
                let cycle = body
                    .split(|c: char| c == ',' || c.is_whitespace())
                    .filter(|s| !s.is_empty())
                    .map(|s| s.parse::<usize>().map_err(|_| err("bad point")))
                    .collect::<Result<Vec<_>, _>>()?;
                cycles.push(cycle);
            }
            rest = rest[close + 1..].trim_start();
        }
        SignedPerm::from_signed_cycles(n, sign, &cycles)
    }

    pub fn degree(&self) -> usize {
        self.images.len() - 2
    }

    /// Full image array, sign pair included.
    pub fn images(&self) -> &[u32] {
        &self.images
    }

    /// Images of the non-sign points.
    pub fn slot_images(&self) -> &[u32] {
        &self.images[..self.degree()]
    }

    #[inline]
    pub fn apply(&self, i: usize) -> usize {
        self.images[i] as usize
    }

    pub fn sign(&self) -> Sign {
        let n = self.degree();
        if self.images[n] as usize == n {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }

    pub fn is_identity(&self) -> bool {
        self.images
            .iter()
            .enumerate()
            .all(|(i, &x)| i == x as usize)
    }

    /// `self ∘ other`: first `other`, then `self`.
    pub fn compose(&self, other: &SignedPerm) -> SignedPerm {
        assert_eq!(self.images.len(), other.images.len(), "degree mismatch");
        SignedPerm {
            images: other
                .images
                .iter()
                .map(|&b| self.images[b as usize])
                .collect(),
        }
    }

    pub fn checked_compose(&self, other: &SignedPerm) -> Result<SignedPerm, PermError> {
        if self.degree() != other.degree() {
            return Err(PermError::DegreeMismatch(self.degree(), other.degree()));
        }
        Ok(self.compose(other))
    }

    pub fn inverse(&self) -> SignedPerm {
        let mut inv = vec![0u32; self.images.len()];
        for (i, &x) in self.images.iter().enumerate() {
            inv[x as usize] = i as u32;
        }
        SignedPerm { images: inv }
    }

    /// The same permutation with the opposite sign.
    pub fn negated(&self) -> SignedPerm {
        let mut p = self.clone();
        let n = p.degree();
        p.images.swap(n, n + 1);
        p
    }

    pub fn lex_cmp(&self, other: &SignedPerm) -> Ordering {
        self.images.cmp(&other.images)
    }

    /// Points moved by the permutation, sign points excluded.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.slot_images()
            .iter()
            .enumerate()
            .filter(|(i, &x)| *i != x as usize)
            .map(|(i, _)| i)
    }

    /// Non-trivial cycles on the slot points, 1-based, each starting at its
    /// least point.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let n = self.degree();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] || self.apply(start) == start {
                continue;
            }
            let mut cycle = Vec::new();
            let mut x = start;
            while !seen[x] {
                seen[x] = true;
                cycle.push(x + 1);
                x = self.apply(x);
            }
            out.push(cycle);
        }
        out
    }

    /// Signed cycle notation, e.g. `-(1,2)(3,4)`.
    pub fn to_cycle_string(&self) -> String {
        let mut s = self.sign().to_string();
        let cycles = self.cycles();
        if cycles.is_empty() {
            s.push_str("()");
        }
        for c in cycles {
            let body: Vec<String> = c.iter().map(|x| x.to_string()).collect();
            s.push('(');
            s.push_str(&body.join(","));
            s.push(')');
        }
        s
    }
}

impl fmt::Display for SignedPerm {
    /// Array form with an explicit sign suffix: `<2,1,4,3|->`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("<")?;
        for (k, x) in self.slot_images().iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}", x + 1)?;
        }
        write!(f, "|{}>", self.sign())
    }
}

impl fmt::Debug for SignedPerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for SignedPerm {
    type Err = PermError;

    /// Array form. `<2,1,4,3,5,6>` lists the full image array including the
    /// sign pair; `<2,1,4,3|->` (or `<2,1,4,3>|-`) lists slot images only.
    fn from_str(text: &str) -> Result<SignedPerm, PermError> {
        let err = |reason: &str| PermError::Parse {
            text: text.to_string(),
            reason: reason.to_string(),
        };
        let t: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        let body = t.strip_prefix('<').ok_or_else(|| err("expected `<`"))?;
        let (body, sign) = if let Some(b) = body.strip_suffix("|+>").or(body.strip_suffix(">|+")) {
            (b, Some(Sign::Plus))
        } else if let Some(b) = body.strip_suffix("|->").or(body.strip_suffix(">|-")) {
            (b, Some(Sign::Minus))
        } else {
            (
                body.strip_suffix('>').ok_or_else(|| err("expected `>`"))?,
                None,
            )
        };
        let pts = if body.is_empty() {
            Vec::new()
        } else {
            body.split(',')
                .map(|s| match s.parse::<u32>() {
                    Ok(x) if x >= 1 => Ok(x - 1),
                    _ => Err(err("bad point")),
                })
                .collect::<Result<Vec<_>, _>>()?
        };
        match sign {
            Some(sign) => SignedPerm::from_slot_images(&pts, sign),
            None => SignedPerm::from_images(pts),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn perm(s: &str) -> SignedPerm {
        s.parse().unwrap()
    }

    #[test]
    fn identity_forms() {
        assert_eq!(SignedPerm::identity(2).images(), &[0, 1, 2, 3]);
        assert_eq!(SignedPerm::identity(0).images(), &[0, 1]);
        let id = SignedPerm::identity(6);
        assert!((0..8).all(|i| id.apply(i) == i));
        assert_eq!(id.sign(), Sign::Plus);
    }

    #[test]
    fn minus_transposition_acts_on_configuration() {
        // g = <b,d,a,f,c,e,+,-> as label codes.
        let g = perm("<2,4,1,6,3,5,7,8>");
        let s = SignedPerm::parse_cycles(6, "-(1,2)").unwrap();
        let g2 = g.compose(&s);
        assert_eq!(g2, perm("<4,2,1,6,3,5,8,7>"));
        assert_eq!(g2.sign(), Sign::Minus);
    }

    #[test]
    fn empty_cycles_give_identity() {
        assert_eq!(
            SignedPerm::parse_cycles(4, "+()").unwrap(),
            SignedPerm::identity(4)
        );
    }

    #[test]
    fn signed_involution_squares_to_identity() {
        let p = SignedPerm::parse_cycles(4, "-(1,3)(2,4)").unwrap();
        assert_eq!(p.compose(&p), SignedPerm::identity(4));
    }

    #[test]
    fn lex_order_example() {
        // <b,a,f,c,e,d> precedes <b,c,a,d,f,e>.
        let x = perm("<2,1,6,3,5,4|+>");
        let y = perm("<2,3,1,4,6,5|+>");
        assert_eq!(x.lex_cmp(&y), Ordering::Less);
    }

    #[test]
    fn sign_twins_sort_adjacent() {
        let a = perm("<2,1,3|+>");
        let b = perm("<2,3,1|+>");
        let c = perm("<1,3,2|+>");
        let mut v = [a.clone(), b.clone(), c.negated(), a.negated(), c.clone()];
        v.sort();
        let pos = |p: &SignedPerm| v.iter().position(|x| x == p).unwrap();
        assert_eq!(pos(&a).abs_diff(pos(&a.negated())), 1);
        assert_eq!(pos(&c).abs_diff(pos(&c.negated())), 1);
    }

    #[test]
    fn cycle_errors() {
        assert!(matches!(
            SignedPerm::parse_cycles(4, "(1,2)(2,3)"),
            Err(PermError::OverlappingCycles(2))
        ));
        assert!(matches!(
            SignedPerm::parse_cycles(4, "(1,5)"),
            Err(PermError::PointOutOfRange { point: 5, max: 4 })
        ));
        assert!(SignedPerm::parse_cycles(4, "1,2").is_err());
    }

    #[test]
    fn array_errors() {
        assert_eq!(
            "<1,1,3,4>".parse::<SignedPerm>(),
            Err(PermError::NotBijection)
        );
        assert_eq!(
            "<3,2,1,4>".parse::<SignedPerm>(),
            Err(PermError::OpenSignPair)
        );
    }

    #[test]
    fn text_round_trips() {
        let p = SignedPerm::parse_cycles(5, "-(1,3,2)(4,5)").unwrap();
        assert_eq!(p.to_cycle_string(), "-(1,3,2)(4,5)");
        assert_eq!(p.to_string().parse::<SignedPerm>().unwrap(), p);
        assert_eq!(
            "<2,1,4,3>|-".parse::<SignedPerm>().unwrap(),
            perm("<2,1,4,3,6,5>")
        );
    }

    #[test]
    fn compose_degree_mismatch_is_an_error() {
        let a = SignedPerm::identity(2);
        let b = SignedPerm::identity(3);
        assert_eq!(a.checked_compose(&b), Err(PermError::DegreeMismatch(2, 3)));
    }

    fn arb_perm(n: usize) -> impl Strategy<Value = SignedPerm> {
        (
            Just((0..n as u32).collect::<Vec<_>>()).prop_shuffle(),
            any::<bool>(),
        )
            .prop_map(|(v, neg)| {
                let sign = if neg { Sign::Minus } else { Sign::Plus };
                SignedPerm::from_slot_images(&v, sign).unwrap()
            })
    }

    proptest! {
        #[test]
        fn inverse_round_trip(p in arb_perm(9)) {
            prop_assert!(p.compose(&p.inverse()).is_identity());
            prop_assert!(p.inverse().compose(&p).is_identity());
        }

        #[test]
        fn compose_is_associative(a in arb_perm(7), b in arb_perm(7), c in arb_perm(7)) {
            prop_assert_eq!(a.compose(&b).compose(&c), a.compose(&b.compose(&c)));
        }

        #[test]
        fn inverse_reverses_products(a in arb_perm(7), b in arb_perm(7)) {
            prop_assert_eq!(a.compose(&b).inverse(), b.inverse().compose(&a.inverse()));
        }

        #[test]
        fn sign_is_a_homomorphism(a in arb_perm(6), b in arb_perm(6)) {
            prop_assert_eq!(a.compose(&b).sign(), a.sign() * b.sign());
        }

        #[test]
        fn composition_stays_bijective(a in arb_perm(8), b in arb_perm(8)) {
            let c = a.compose(&b);
            prop_assert!(SignedPerm::from_images(c.images().to_vec()).is_ok());
        }

        #[test]
        fn negation_touches_only_sign_pair(a in arb_perm(6)) {
            let b = a.negated();
            prop_assert_eq!(a.slot_images(), b.slot_images());
            prop_assert_ne!(a.sign(), b.sign());
        }
    }
}
