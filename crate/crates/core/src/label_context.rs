//! Implicit label symmetry group: the Values and Label-Groups arrays.
//!
//! Labels are numbered in the canonical order: free labels, then component
//! classes, then dummy pairs (lower leg first). A label's value is the least
//! label it can be exchanged with; its group code says how.

use thiserror::Error;

use crate::signed_perm::{Sign, SignedPerm};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LabelError {
    #[error("empty index class")]
    EmptyClass,
    #[error("label {0} out of range")]
    OutOfRange(usize),
    #[error("label {label} cannot reach least value {least} with group {group:?}")]
    Unreachable {
        label: usize,
        least: usize,
        group: GroupCode,
    },
}

/// How labels sharing a value may be exchanged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GroupCode {
    None,
    Component,
    SDummy,
    ADummy,
    LDummy,
    UDummy,
}

impl GroupCode {
    pub fn is_dummy(self) -> bool {
        matches!(
            self,
            GroupCode::SDummy | GroupCode::ADummy | GroupCode::LDummy | GroupCode::UDummy
        )
    }
}

/// Metric carried by an index bundle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Metric {
    Symmetric,
    Antisymmetric,
    None,
}

/// One class of labels, listed in canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IndexClass {
    Free,
    /// `size` copies of the same component index.
    Component {
        size: usize,
    },
    /// `pairs` contracted pairs from one bundle.
    Dummy {
        pairs: usize,
        metric: Metric,
    },
}

impl IndexClass {
    pub fn len(&self) -> usize {
        match *self {
            IndexClass::Free => 1,
            IndexClass::Component { size } => size,
            IndexClass::Dummy { pairs, .. } => 2 * pairs,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

const NO_PARTNER: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelContext {
    values: Vec<u32>,
    groups: Vec<GroupCode>,
    /// Other leg of each dummy label. Fixed at build time.
    partner: Vec<u32>,
}

impl LabelContext {
    pub fn build(classes: &[IndexClass]) -> Result<LabelContext, LabelError> {
        let mut values = Vec::new();
        let mut groups = Vec::new();
        let mut partner = Vec::new();
        for class in classes {
            if class.is_empty() {
                return Err(LabelError::EmptyClass);
            }
            let start = values.len() as u32;
            match *class {
                IndexClass::Free => {
                    values.push(start);
                    groups.push(GroupCode::None);
                    partner.push(NO_PARTNER);
                }
                IndexClass::Component { size } => {
                    let code = if size > 1 {
                        GroupCode::Component
                    } else {
                        GroupCode::None
                    };
                    for _ in 0..size {
                        values.push(start);
                        groups.push(code);
                        partner.push(NO_PARTNER);
                    }
                }
                IndexClass::Dummy { pairs, metric } => {
                    for k in 0..pairs as u32 {
                        let lo = start + 2 * k;
                        partner.extend([lo + 1, lo]);
                        match metric {
                            Metric::Symmetric | Metric::Antisymmetric => {
                                let code = if metric == Metric::Symmetric {
                                    GroupCode::SDummy
                                } else {
                                    GroupCode::ADummy
                                };
                                values.extend([start, start]);
                                groups.extend([code, code]);
                            }
                            Metric::None if pairs > 1 => {
                                values.extend([start, start + 1]);
                                groups.extend([GroupCode::LDummy, GroupCode::UDummy]);
                            }
                            Metric::None => {
                                values.extend([lo, lo + 1]);
                                groups.extend([GroupCode::None, GroupCode::None]);
                            }
                        }
                    }
                }
            }
        }
        Ok(LabelContext {
            values,
            groups,
            partner,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[u32] {
        &self.values
    }

    pub fn groups(&self) -> &[GroupCode] {
        &self.groups
    }

    #[inline]
    pub fn value(&self, label: usize) -> usize {
        self.values[label] as usize
    }

    #[inline]
    pub fn group(&self, label: usize) -> GroupCode {
        self.groups[label]
    }

    /// The other leg of a dummy label.
    pub fn partner(&self, label: usize) -> Option<usize> {
        match self.partner[label] {
            NO_PARTNER => None,
            p => Some(p as usize),
        }
    }

    /// Least label reachable from `label` by the remaining label symmetries.
    pub fn least_label_reachable(&self, label: usize) -> usize {
        self.value(label)
    }

    /// A label permutation taking `label` to `least`, built from the group
    /// code alone.
    pub fn label_permutation_from_group(
        &self,
        label: usize,
        least: usize,
    ) -> Result<SignedPerm, LabelError> {
        let n = self.len();
        if label >= n || least >= n {
            return Err(LabelError::OutOfRange(label.max(least)));
        }
        let group = self.groups[label];
        let unreachable = LabelError::Unreachable {
            label,
            least,
            group,
        };
        if label == least {
            return Ok(SignedPerm::identity(n));
        }
        let mut v: Vec<u32> = (0..n as u32 + 2).collect();
        let swap = |v: &mut Vec<u32>, a: usize, b: usize| v.swap(a, b);
        match group {
            GroupCode::None => return Err(unreachable),
            GroupCode::Component => swap(&mut v, label, least),
            GroupCode::SDummy | GroupCode::ADummy => {
                if label < least || least + 1 >= n {
                    return Err(unreachable);
                }
                let d = label - least;
                let low = least + 2 * (d / 2);
                let mut p = SignedPerm::identity(n);
                if low != least {
                    swap(&mut v, least, low);
                    swap(&mut v, least + 1, low + 1);
                    p = SignedPerm::from_images(v.clone()).expect("block swap");
                }
                if d % 2 == 1 {
                    let sign = if group == GroupCode::ADummy {
                        Sign::Minus
                    } else {
                        Sign::Plus
                    };
                    let mut w = SignedPerm::signed_identity(n, sign).images().to_vec();
                    w.swap(least, least + 1);
                    p = SignedPerm::from_images(w).expect("intra swap").compose(&p);
                }
                return Ok(p);
            }
            GroupCode::LDummy => {
                if label < least || (label - least) % 2 == 1 || label + 1 >= n {
                    return Err(unreachable);
                }
                swap(&mut v, least, label);
                swap(&mut v, least + 1, label + 1);
            }
            GroupCode::UDummy => {
                if label < least || (label - least) % 2 == 1 || least == 0 {
                    return Err(unreachable);
                }
                swap(&mut v, least, label);
                swap(&mut v, least - 1, label - 1);
            }
        }
        Ok(SignedPerm::from_images(v).expect("label swap"))
    }

    /// Freezes the label `least` (and its dummy partner), returning the
    /// updated context.
    pub fn update(&self, least: usize) -> Result<LabelContext, LabelError> {
        let mut next = self.clone();
        next.update_in_place(least)?;
        Ok(next)
    }

    pub fn update_in_place(&mut self, least: usize) -> Result<(), LabelError> {
        let n = self.len();
        if least >= n {
            return Err(LabelError::OutOfRange(least));
        }
        let (start, threshold, increment) = match self.groups[least] {
            GroupCode::None => return Ok(()),
            GroupCode::Component => {
                self.groups[least] = GroupCode::None;
                (least + 1, least, 1)
            }
            GroupCode::SDummy | GroupCode::ADummy => {
                self.values[least + 1] += 1;
                self.groups[least] = GroupCode::None;
                self.groups[least + 1] = GroupCode::None;
                (least + 2, least, 2)
            }
            GroupCode::LDummy => {
                self.groups[least] = GroupCode::None;
                self.groups[least + 1] = GroupCode::None;
                (least + 2, least + 1, 2)
            }
            GroupCode::UDummy => {
                self.groups[least - 1] = GroupCode::None;
                self.groups[least] = GroupCode::None;
                (least + 1, least, 2)
            }
        };
        let mut j = start;
        while j < n && self.values[j] as usize <= threshold {
            self.values[j] += increment;
            j += 1;
        }
        Ok(())
    }

    /// Generators of the label group still encoded by the arrays.
    pub fn generators(&self) -> Vec<SignedPerm> {
        let n = self.len();
        let mut out = Vec::new();
        let perm = |pairs: &[(usize, usize)], sign: Sign| {
            let mut v = SignedPerm::signed_identity(n, sign).images().to_vec();
            for &(a, b) in pairs {
                v.swap(a, b);
            }
            SignedPerm::from_images(v).expect("generator")
        };
        for value in 0..n {
            let members: Vec<usize> = (0..n)
                .filter(|&l| self.value(l) == value && self.groups[l] != GroupCode::None)
                .collect();
            let Some(&first) = members.first() else {
                continue;
            };
            match self.groups[first] {
                GroupCode::None | GroupCode::UDummy => {}
                GroupCode::Component => {
                    for w in members.windows(2) {
                        out.push(perm(&[(w[0], w[1])], Sign::Plus));
                    }
                }
                GroupCode::SDummy | GroupCode::ADummy => {
                    let sign = if self.groups[first] == GroupCode::ADummy {
                        Sign::Minus
                    } else {
                        Sign::Plus
                    };
                    let lows: Vec<usize> = members.iter().copied().step_by(2).collect();
                    for &lo in &lows {
                        out.push(perm(&[(lo, lo + 1)], sign));
                    }
                    for w in lows.windows(2) {
                        out.push(perm(&[(w[0], w[1]), (w[0] + 1, w[1] + 1)], Sign::Plus));
                    }
                }
                GroupCode::LDummy => {
                    for w in members.windows(2) {
                        out.push(perm(&[(w[0], w[1]), (w[0] + 1, w[1] + 1)], Sign::Plus));
                    }
                }
            }
        }
        out
    }

    /// Checks the value rules on the labels that are still exchangeable.
    pub fn check_definition(&self) -> Result<(), String> {
        let n = self.len();
        for l in 0..n {
            let v = self.value(l);
            if v > l {
                return Err(format!("label {l} has value {v} above itself"));
            }
            match self.groups[l] {
                GroupCode::None => {
                    if (0..n).any(|k| self.value(k) == v && self.groups[k] != GroupCode::None) {
                        return Err(format!(
                            "frozen label {l} shares value {v} with a live class"
                        ));
                    }
                }
                GroupCode::Component | GroupCode::SDummy | GroupCode::ADummy => {
                    if self.groups[v] != self.groups[l] {
                        return Err(format!("label {l}: least label {v} has another group"));
                    }
                    if (v..=l).any(|k| self.value(k) != v || self.groups[k] != self.groups[l]) {
                        return Err(format!("class of label {l} is not contiguous"));
                    }
                }
                GroupCode::LDummy | GroupCode::UDummy => {
                    if (l - v) % 2 == 1 || self.groups[v] != self.groups[l] {
                        return Err(format!("label {l}: bad alternating class"));
                    }
                }
            }
            if self.groups[l].is_dummy() && self.partner(l).is_none() {
                return Err(format!("dummy label {l} without partner"));
            }
        }
        Ok(())
    }
}
