//! Finite set systems on a ground set `{0, .., N-1}`: restriction,
//! shattering, VC dimension, the Sauer bound and the maximum-class test.
//!
//! Members are bit masks with point `i` at bit `i`. The canonical order is
//! lexicographic on the bitstring `b0 b1 .. b(N-1)`, which is the numeric
//! order of the bit-reversed mask.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

/// Largest supported ground set.
pub const MAX_GROUND: usize = 64;

/// Above this ground size [`is_maximum`] only checks the full-set count.
pub const EXHAUSTIVE_LIMIT: usize = 12;

fn lex_key(mask: u64) -> u64 {
    mask.reverse_bits()
}

fn full_mask(n: usize) -> u64 {
    if n == 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// Gathers the bits of `value` selected by `positions` into the low bits.
fn compress(value: u64, positions: &[usize]) -> u64 {
    positions
        .iter()
        .enumerate()
        .fold(0, |acc, (j, &p)| acc | (((value >> p) & 1) << j))
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SetSystem {
    ground: usize,
    members: Vec<u64>,
}

impl SetSystem {
    /// Builds a canonical (sorted, duplicate-free) system.
    pub fn new(ground: usize, members: impl IntoIterator<Item = u64>) -> Result<Self> {
        if ground > MAX_GROUND {
            return Err(Error::InvalidInput(format!(
                "ground set of {ground} exceeds {MAX_GROUND}"
            )));
        }
        let limit = full_mask(ground);
        let mut members: Vec<u64> = members.into_iter().collect();
        if let Some(m) = members.iter().find(|&&m| m & !limit != 0) {
            return Err(Error::InvalidInput(format!(
                "member {m:#b} does not fit in {ground} bits"
            )));
        }
        members.sort_unstable_by_key(|&m| lex_key(m));
        members.dedup();
        Ok(SetSystem { ground, members })
    }

    pub fn from_index_sets(ground: usize, sets: &[&[usize]]) -> Result<Self> {
        let mut masks = Vec::with_capacity(sets.len());
        for set in sets {
            let mut m = 0u64;
            for &i in *set {
                if i >= ground {
                    return Err(Error::InvalidInput(format!(
                        "index {i} outside a ground set of {ground}"
                    )));
                }
                m |= 1 << i;
            }
            masks.push(m);
        }
        SetSystem::new(ground, masks)
    }

    pub fn empty(ground: usize) -> Self {
        SetSystem {
            ground,
            members: Vec::new(),
        }
    }

    pub fn power_set(ground: usize) -> Result<Self> {
        if ground > 24 {
            return Err(Error::Refused(format!("power set of {ground} points is too large")));
        }
        SetSystem::new(ground, 0..(1u64 << ground))
    }

    pub fn ground_size(&self) -> usize {
        self.ground
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[u64] {
        &self.members
    }

    pub fn contains(&self, mask: u64) -> bool {
        self.members
            .binary_search_by_key(&lex_key(mask), |&m| lex_key(m))
            .is_ok()
    }

    pub fn bitstring(&self, mask: u64) -> String {
        (0..self.ground)
            .map(|i| if mask >> i & 1 == 1 { '1' } else { '0' })
            .collect()
    }

    /// Number of distinct traces `C ∩ Y` for the subset given as a mask.
    pub fn trace_count(&self, subset: u64) -> usize {
        let mut traces: Vec<u64> = self.members.iter().map(|m| m & subset).collect();
        traces.sort_unstable();
        traces.dedup();
        traces.len()
    }

    /// Serializes to the set-system file format: a `N=<N> count=<c>` header,
    /// then one bitstring per member in lexicographic order.
    pub fn to_file_string(&self) -> String {
        let mut out = format!("N={} count={}\n", self.ground, self.members.len());
        for &m in &self.members {
            out.push_str(&self.bitstring(m));
            out.push('\n');
        }
        out
    }

    pub fn parse_file(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Format("empty set-system file".into()))?;
        let mut ground = None;
        let mut count = None;
        for field in header.split_whitespace() {
            match field.split_once('=') {
                Some(("N", v)) => ground = v.parse::<usize>().ok(),
                Some(("count", v)) => count = v.parse::<usize>().ok(),
                _ => return Err(Error::Format(format!("unexpected header field `{field}`"))),
            }
        }
        let (Some(ground), Some(count)) = (ground, count) else {
            return Err(Error::Format("header must be `N=<N> count=<c>`".into()));
        };
        let mut masks = Vec::with_capacity(count);
        for line in lines {
            if line.len() != ground || !line.bytes().all(|b| b == b'0' || b == b'1') {
                return Err(Error::Format(format!("`{line}` is not a {ground}-character bitstring")));
            }
            masks.push(
                line.bytes()
                    .enumerate()
                    .fold(0u64, |m, (i, b)| m | (u64::from(b - b'0') << i)),
            );
        }
        if masks.len() != count {
            return Err(Error::Format(format!(
                "header declares {count} members, found {}",
                masks.len()
            )));
        }
        let system = SetSystem::new(ground, masks)?;
        if system.len() != count {
            return Err(Error::Format("duplicate members".into()));
        }
        Ok(system)
    }
}

impl fmt::Display for SetSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_file_string())
    }
}

/// `sum_{i=0}^{min(d, N)} C(N, i)`; equals `2^N` whenever `N <= d`.
pub fn sauer_bound(n: usize, d: usize) -> u128 {
    let mut total = 0u128;
    let mut binom = 1u128;
    for i in 0..=d.min(n) {
        total += binom;
        binom = binom * (n - i) as u128 / (i + 1) as u128;
    }
    total
}

fn subset_positions(s: &SetSystem, subset: &[usize]) -> Result<Vec<usize>> {
    let mut positions = subset.to_vec();
    positions.sort_unstable();
    positions.dedup();
    if let Some(&i) = positions.iter().find(|&&i| i >= s.ground) {
        return Err(Error::InvalidInput(format!(
            "index {i} outside a ground set of {}",
            s.ground
        )));
    }
    Ok(positions)
}

fn positions_mask(positions: &[usize]) -> u64 {
    positions.iter().fold(0, |m, &p| m | 1 << p)
}

/// The trace system `{ C ∩ Y }` re-indexed onto `Y` (in increasing index order).
pub fn restrict(s: &SetSystem, subset: &[usize]) -> Result<SetSystem> {
    let positions = subset_positions(s, subset)?;
    SetSystem::new(positions.len(), s.members.iter().map(|&m| compress(m, &positions)))
}

pub fn shatters(s: &SetSystem, subset: &[usize]) -> Result<bool> {
    let positions = subset_positions(s, subset)?;
    Ok(shatters_mask(s, positions_mask(&positions)))
}

fn shatters_mask(s: &SetSystem, mask: u64) -> bool {
    let size = mask.count_ones();
    if size >= 64 || s.len() < 1usize << size {
        return false;
    }
    s.trace_count(mask) == 1usize << size
}

/// Largest size of a shattered subset, or `-1` for the empty system.
///
/// Searches sizes upward and stops at the first size with no shattered
/// subset; shattering is inherited by subsets, so nothing larger can succeed.
pub fn vc_dimension(s: &SetSystem) -> i64 {
    if s.is_empty() {
        return -1;
    }
    let mut best = 0;
    for size in 1..=s.ground {
        if s.len() < 1usize << size.min(63) {
            break;
        }
        let found = itertools::Itertools::combinations(0..s.ground, size).any(|c| shatters_mask(s, positions_mask(&c)));
        if !found {
            break;
        }
        best = size as i64;
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MaximumCriterion {
    /// Only `|C| = sauer_bound(N, d)` on the whole ground set was checked.
    FullSet,
    /// Every subset `Y` satisfied `|C|_Y| = sauer_bound(|Y|, d)`.
    AllSubsets,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MaximumVerdict {
    pub is_maximum: bool,
    pub dimension: usize,
    pub full_count: u128,
    pub bound: u128,
    pub criterion: MaximumCriterion,
    /// First subset (ascending mask order) whose trace count misses the bound.
    pub failing_subset: Option<Vec<usize>>,
    pub failing_count: Option<u128>,
}

/// Tests `|C|_Y| = sauer_bound(|Y|, d)`, on the full ground set and, when
/// `exhaustive` and `N <= EXHAUSTIVE_LIMIT`, on every subset `Y`.
pub fn is_maximum(s: &SetSystem, d: usize, exhaustive: bool) -> MaximumVerdict {
    let full_count = s.len() as u128;
    let bound = sauer_bound(s.ground, d);
    let sweep = exhaustive && s.ground <= EXHAUSTIVE_LIMIT;
    let mut verdict = MaximumVerdict {
        is_maximum: full_count == bound,
        dimension: d,
        full_count,
        bound,
        criterion: if sweep {
            MaximumCriterion::AllSubsets
        } else {
            MaximumCriterion::FullSet
        },
        failing_subset: None,
        failing_count: None,
    };
    if !verdict.is_maximum || !sweep {
        return verdict;
    }
    for mask in 0..(1u64 << s.ground) {
        let count = s.trace_count(mask) as u128;
        if count != sauer_bound(mask.count_ones() as usize, d) {
            verdict.is_maximum = false;
            verdict.failing_subset = Some((0..s.ground).filter(|&i| mask >> i & 1 == 1).collect());
            verdict.failing_count = Some(count);
            break;
        }
    }
    verdict
}

/// Checks Sauer's lemma `|C|_Y| <= sauer_bound(|Y|, VC(C))` on every subset.
///
/// Returns the first violating subset; `None` means the lemma holds
/// everywhere. Intended for `N <= EXHAUSTIVE_LIMIT`.
pub fn sauer_violation(s: &SetSystem) -> Option<Vec<usize>> {
    let vc = vc_dimension(s);
    if vc < 0 {
        return None;
    }
    (0..(1u64 << s.ground))
        .find(|&mask| s.trace_count(mask) as u128 > sauer_bound(mask.count_ones() as usize, vc as usize))
        .map(|mask| (0..s.ground).filter(|&i| mask >> i & 1 == 1).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn binom(n: u128, k: u128) -> u128 {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }

    #[test]
    fn sauer_examples() {
        assert_eq!(sauer_bound(5, 2), 16);
        assert_eq!(sauer_bound(10, 3), 176);
        assert_eq!(sauer_bound(3, 5), 8);
        assert_eq!(sauer_bound(0, 0), 1);
        assert_eq!(sauer_bound(8, 3), 93);
        assert_eq!(sauer_bound(9, 4), 256);
        assert_eq!(sauer_bound(12, 3), 299);
        assert_eq!(sauer_bound(8, 5), 219);
        assert_eq!(sauer_bound(64, 64), 1u128 << 64);
        for n in 0..20u128 {
            for d in 0..=n {
                let direct: u128 = (0..=d).map(|i| binom(n, i)).sum();
                assert_eq!(sauer_bound(n as usize, d as usize), direct);
            }
        }
    }

    #[test]
    fn canonical_lexicographic_order() {
        let s = SetSystem::from_index_sets(3, &[&[2], &[0], &[], &[0], &[1, 2]]).unwrap();
        let lines: Vec<String> = s.members().iter().map(|&m| s.bitstring(m)).collect();
        assert_eq!(lines, ["000", "001", "011", "100"]);
        assert!(SetSystem::new(2, [4]).is_err());
    }

    #[test]
    fn restriction() {
        let s = SetSystem::from_index_sets(2, &[&[], &[0], &[0, 1]]).unwrap();
        assert_eq!(restrict(&s, &[0, 1]).unwrap(), s);
        let r = restrict(&s, &[1]).unwrap();
        assert_eq!(r, SetSystem::from_index_sets(1, &[&[], &[0]]).unwrap());
        assert!(restrict(&s, &[2]).is_err());
    }

    #[test]
    fn shattering() {
        let s = SetSystem::from_index_sets(3, &[&[1]]).unwrap();
        assert!(shatters(&s, &[]).unwrap());
        assert!(!shatters(&SetSystem::empty(3), &[]).unwrap());
        let p = SetSystem::power_set(3).unwrap();
        assert!(shatters(&p, &[0, 1, 2]).unwrap());
    }

    #[test]
    fn vc_examples() {
        assert_eq!(vc_dimension(&SetSystem::empty(4)), -1);
        assert_eq!(vc_dimension(&SetSystem::power_set(3).unwrap()), 3);
        assert_eq!(vc_dimension(&SetSystem::from_index_sets(4, &[&[2]]).unwrap()), 0);
        // Intervals on a line of 5 points have VC dimension 2.
        let mut intervals = vec![0u64];
        for a in 0..5 {
            for b in a..5 {
                intervals.push((a..=b).fold(0, |m, i| m | 1 << i));
            }
        }
        let s = SetSystem::new(5, intervals).unwrap();
        assert_eq!(vc_dimension(&s), 2);
        assert_eq!(s.len() as u128, sauer_bound(5, 2));
        assert!(is_maximum(&s, 2, true).is_maximum);
    }

    #[test]
    fn maximum_examples() {
        let p = SetSystem::power_set(4).unwrap();
        let v = is_maximum(&p, 4, true);
        assert!(v.is_maximum);
        assert_eq!(v.criterion, MaximumCriterion::AllSubsets);

        // Right count, wrong structure: 4 = sauer_bound(3, 1) members, but the
        // trace on {0, 1} has only 2 elements.
        let s = SetSystem::from_index_sets(3, &[&[], &[0, 1], &[0, 1, 2], &[2]]).unwrap();
        let full = is_maximum(&s, 1, false);
        assert!(full.is_maximum);
        assert_eq!(full.criterion, MaximumCriterion::FullSet);
        let ex = is_maximum(&s, 1, true);
        assert!(!ex.is_maximum);
        assert_eq!(ex.failing_subset, Some(vec![0, 1]));
        assert_eq!(ex.failing_count, Some(2));

        let short = is_maximum(&SetSystem::from_index_sets(3, &[&[]]).unwrap(), 1, true);
        assert!(!short.is_maximum);
        assert_eq!(short.failing_subset, None);
    }

    #[test]
    fn file_round_trip() {
        let s = SetSystem::from_index_sets(4, &[&[], &[0, 3], &[1]]).unwrap();
        let text = s.to_file_string();
        assert_eq!(text, "N=4 count=3\n0000\n0100\n1001\n");
        assert_eq!(SetSystem::parse_file(&text).unwrap(), s);
        assert!(SetSystem::parse_file("N=2 count=2\n00\n").is_err());
        assert!(SetSystem::parse_file("N=2 count=1\n0a\n").is_err());
        assert!(SetSystem::parse_file("N=2 count=2\n01\n01\n").is_err());
        assert!(SetSystem::parse_file("").is_err());
    }

    fn arb_system() -> impl Strategy<Value = SetSystem> {
        (1usize..=8).prop_flat_map(|n| {
            prop::collection::vec(0u64..(1 << n), 0..40).prop_map(move |m| SetSystem::new(n, m).unwrap())
        })
    }

    proptest! {
        #[test]
        fn sauer_lemma_holds(s in arb_system()) {
            prop_assert_eq!(sauer_violation(&s), None);
        }

        #[test]
        fn vc_of_restriction_is_monotone(s in arb_system(), pick in any::<u64>()) {
            let subset: Vec<usize> = (0..s.ground_size()).filter(|&i| pick >> i & 1 == 1).collect();
            let r = restrict(&s, &subset).unwrap();
            prop_assert!(vc_dimension(&r) <= vc_dimension(&s));
        }

        #[test]
        fn shattering_is_hereditary(s in arb_system(), pick in any::<u64>(), sub in any::<u64>()) {
            let y: Vec<usize> = (0..s.ground_size()).filter(|&i| pick >> i & 1 == 1).collect();
            let z: Vec<usize> = y.iter().copied().filter(|&i| sub >> i & 1 == 1).collect();
            if shatters(&s, &y).unwrap() {
                prop_assert!(shatters(&s, &z).unwrap());
            }
        }

        #[test]
        fn file_format_round_trips(s in arb_system()) {
            prop_assert_eq!(SetSystem::parse_file(&s.to_file_string()).unwrap(), s);
        }

        #[test]
        fn restricted_count_is_trace_count(s in arb_system(), pick in any::<u64>()) {
            let mask = pick & ((1u64 << s.ground_size()) - 1);
            let subset: Vec<usize> = (0..s.ground_size()).filter(|&i| mask >> i & 1 == 1).collect();
            prop_assert_eq!(restrict(&s, &subset).unwrap().len(), s.trace_count(mask));
        }
    }
}
