//! Interval algebra for node labels: merging label sets with exactness
//! tracking, the gap-dual representation, cover cost, and the budgeted
//! k-interval covers (optimal by dynamic programming, or greedy).
//!
//! A label set is a strictly sorted sequence of non-adjacent inclusive
//! integer intervals over post-order ids. Each interval is either exact
//! (every id inside is truly reachable) or approximate (may contain false
//! positives). Covering a set to at most `k` intervals merges adjacent
//! intervals across chosen gaps; merged intervals become approximate while
//! surviving singletons keep their input exactness. The cover objective is
//! the number of ids that end up inside approximate intervals.

/// Inclusive id range with an exactness flag.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Interval {
    pub begin: u32,
    pub end: u32,
    pub exact: bool,
}

impl Interval {
    pub fn exact(begin: u32, end: u32) -> Interval {
        Interval { begin, end, exact: true }
    }

    pub fn approx(begin: u32, end: u32) -> Interval {
        Interval { begin, end, exact: false }
    }

    /// Number of ids contained (never zero).
    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> u64 {
        (self.end - self.begin) as u64 + 1
    }

    pub fn contains(&self, id: u32) -> bool {
        self.begin <= id && id <= self.end
    }
}

/// Sorted, non-adjacent interval sequence — the per-node label.
///
/// Invariant: for consecutive intervals `I`, `J`: `I.end + 1 < J.begin`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LabelSet {
    intervals: Vec<Interval>,
}

impl LabelSet {
    /// Wraps a list of intervals, asserting the set invariants.
    pub fn from_intervals(intervals: Vec<Interval>) -> LabelSet {
        for iv in &intervals {
            assert!(iv.begin <= iv.end, "interval with begin > end");
        }
        for w in intervals.windows(2) {
            assert!(
                (w[0].end as u64) + 1 < w[1].begin as u64,
                "intervals must be sorted and non-adjacent"
            );
        }
        LabelSet { intervals }
    }

    pub fn single(iv: Interval) -> LabelSet {
        LabelSet { intervals: vec![iv] }
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// Total number of ids inside approximate intervals.
    pub fn cover_cost(&self) -> u64 {
        self.intervals.iter().filter(|iv| !iv.exact).map(Interval::len).sum()
    }

    /// The dual representation: the maximal id ranges strictly between
    /// consecutive intervals. Non-adjacency makes every gap nonempty.
    pub fn gaps(&self) -> GapSet {
        let gaps = self.intervals.windows(2).map(|w| (w[0].end + 1, w[1].begin - 1)).collect();
        GapSet { gaps }
    }
}

/// Ordered id ranges between consecutive intervals of a label set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GapSet {
    pub gaps: Vec<(u32, u32)>,
}

impl GapSet {
    pub fn len(&self) -> usize {
        self.gaps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gaps.is_empty()
    }

    /// Reconstructs the plain interval skeleton (without exactness) from the
    /// gaps plus the outer boundary ids.
    pub fn reconstruct(&self, first_begin: u32, last_end: u32) -> Vec<(u32, u32)> {
        let mut out = Vec::with_capacity(self.gaps.len() + 1);
        let mut begin = first_begin;
        for &(gb, ge) in &self.gaps {
            out.push((begin, gb - 1));
            begin = ge + 1;
        }
        out.push((begin, last_end));
        out
    }
}

/// Merges two label sets (the ⊕ operation). The result covers exactly the
/// union of the input ids; an output interval is exact iff every id in it is
/// covered by some exact input interval. Subsumption and extension are
/// resolved exhaustively, and adjacent intervals coalesce.
pub fn merge_interval_sets(a: &LabelSet, b: &LabelSet) -> LabelSet {
    let runs = coalesce_union(&a.intervals, &b.intervals, |_| true);
    let exact_runs = coalesce_union(&a.intervals, &b.intervals, |iv| iv.exact);

    // both lists are sorted and coalesced, so containment is a linear scan
    let mut out = Vec::with_capacity(runs.len());
    let mut e = 0usize;
    for (begin, end) in runs {
        while e < exact_runs.len() && exact_runs[e].1 < begin {
            e += 1;
        }
        let exact = e < exact_runs.len() && exact_runs[e].0 <= begin && end <= exact_runs[e].1;
        out.push(Interval { begin, end, exact });
    }
    LabelSet { intervals: out }
}

/// Two-pointer union of the selected intervals from both inputs, coalescing
/// overlapping and adjacent ranges into maximal runs.
fn coalesce_union(
    a: &[Interval],
    b: &[Interval],
    keep: impl Fn(&Interval) -> bool,
) -> Vec<(u32, u32)> {
    let mut out: Vec<(u32, u32)> = Vec::new();
    let (mut i, mut j) = (0usize, 0usize);
    loop {
        let next = loop {
            match (a.get(i), b.get(j)) {
                (Some(x), Some(y)) => {
                    if x.begin <= y.begin {
                        i += 1;
                        if keep(x) {
                            break Some(x);
                        }
                    } else {
                        j += 1;
                        if keep(y) {
                            break Some(y);
                        }
                    }
                }
                (Some(x), None) => {
                    i += 1;
                    if keep(x) {
                        break Some(x);
                    }
                }
                (None, Some(y)) => {
                    j += 1;
                    if keep(y) {
                        break Some(y);
                    }
                }
                (None, None) => break None,
            }
        };
        let Some(iv) = next else { break };
        match out.last_mut() {
            Some(last) if (iv.begin as u64) <= last.1 as u64 + 1 => {
                last.1 = last.1.max(iv.end);
            }
            _ => out.push((iv.begin, iv.end)),
        }
    }
    out
}

/// Merges the runs of `s` designated by `preserve` (one flag per gap: `true`
/// keeps the gap, `false` merges across it). Merged runs become approximate.
fn apply_gap_selection(s: &LabelSet, preserve: &[bool]) -> LabelSet {
    debug_assert_eq!(preserve.len() + 1, s.len().max(1));
    let ivs = s.intervals();
    let mut out = Vec::new();
    let mut start = 0usize;
    for end in 0..ivs.len() {
        let boundary = end + 1 == ivs.len() || preserve[end];
        if boundary {
            if start == end {
                out.push(ivs[start]);
            } else {
                out.push(Interval::approx(ivs[start].begin, ivs[end].end));
            }
            start = end + 1;
        }
    }
    LabelSet { intervals: out }
}

/// Cost contribution of an interval that survives a cover unmerged.
fn standalone_cost(iv: &Interval) -> u64 {
    if iv.exact {
        0
    } else {
        iv.len()
    }
}

/// Optimal k-interval cover: at most `k` intervals covering all input ids
/// with the minimum number of ids inside approximate intervals, over all
/// covers obtainable by merging adjacent intervals.
///
/// Dynamic program over (prefix length, preserved-gap budget), O(kN).
///
/// Panics if `k < 1`.
pub fn optimal_k_cover(s: &LabelSet, k: u32) -> LabelSet {
    assert!(k >= 1, "cover budget k must be >= 1");
    let n = s.len();
    if n <= k as usize {
        return s.clone();
    }
    let ivs = s.intervals();
    let budget = (k - 1) as usize; // gaps we may preserve
    let cols = budget + 1;

    const INF: u64 = u64::MAX / 4;
    const NEG_INF_GUARD: i64 = i64::MAX / 4;

    // cost[j][g]: minimal cost covering the first j intervals with at most
    // g preserved gaps. best_open[j][g]: min over run starts i ≤ j of
    // (prefix cost before i) − α_i, with the matching argmin run start.
    let idx = |j: usize, g: usize| j * cols + g;
    let mut cost = vec![INF; (n + 1) * cols];
    let mut best_open = vec![NEG_INF_GUARD; (n + 1) * cols];
    let mut open_start = vec![0u32; (n + 1) * cols];
    // choice: 0 = interval j kept standalone, 1 = run ending at j
    let mut choice = vec![0u8; (n + 1) * cols];

    for g in 0..cols {
        cost[idx(0, g)] = 0;
    }
    for j in 1..=n {
        let iv = &ivs[j - 1];
        for g in 0..cols {
            // cost of everything before a run/standalone starting at j
            let before = if j == 1 {
                0
            } else if g >= 1 {
                cost[idx(j - 1, g - 1)]
            } else {
                INF
            };

            let (mut open, mut start) = if j == 1 {
                (NEG_INF_GUARD, 0u32)
            } else {
                (best_open[idx(j - 1, g)], open_start[idx(j - 1, g)])
            };
            if before < INF {
                let cand = before as i64 - iv.begin as i64;
                // on ties prefer the later run start (finer cover)
                if cand <= open {
                    open = cand;
                    start = (j - 1) as u32;
                }
            }
            best_open[idx(j, g)] = open;
            open_start[idx(j, g)] = start;

            let single = before.saturating_add(standalone_cost(iv));
            let run = if open >= NEG_INF_GUARD { INF } else { (open + iv.end as i64 + 1) as u64 };
            if single <= run {
                cost[idx(j, g)] = single;
                choice[idx(j, g)] = 0;
            } else {
                cost[idx(j, g)] = run;
                choice[idx(j, g)] = 1;
            }
        }
    }

    // walk the table back to materialize the chosen cover
    let mut out: Vec<Interval> = Vec::with_capacity(k as usize);
    let mut j = n;
    let mut g = budget;
    while j > 0 {
        // i: first interval of the block ending at j
        let i = if choice[idx(j, g)] == 0 {
            out.push(ivs[j - 1]);
            j
        } else {
            let start = open_start[idx(j, g)] as usize; // run covers ivs[start..j]
            out.push(Interval::approx(ivs[start].begin, ivs[j - 1].end));
            start + 1
        };
        if i == 1 {
            break;
        }
        j = i - 1;
        g -= 1; // the gap before the block was preserved
    }
    out.reverse();
    debug_assert!(out.len() <= k as usize);
    LabelSet { intervals: out }
}

/// Greedy k-interval cover: starting from the fully merged set, iteratively
/// preserves the gap with the greatest cost reduction given the current
/// selection, until `k − 1` gaps are preserved.
///
/// The gain of preserving a gap is its width, plus the width of an adjacent
/// interval that would thereby stand alone if that interval is exact. Gains
/// only grow as neighbors get selected, so stale heap entries are refreshed
/// lazily on pop.
///
/// Panics if `k < 1`.
pub fn greedy_k_cover(s: &LabelSet, k: u32) -> LabelSet {
    assert!(k >= 1, "cover budget k must be >= 1");
    let n = s.len();
    if n <= k as usize {
        return s.clone();
    }
    let ivs = s.intervals();
    let gap_count = n - 1;
    let mut preserved = vec![false; gap_count];

    let gain = |j: usize, preserved: &[bool]| -> u64 {
        let mut gain = (ivs[j + 1].begin - ivs[j].end) as u64 - 1;
        let left_alone = j == 0 || preserved[j - 1];
        if left_alone && ivs[j].exact {
            gain += ivs[j].len();
        }
        let right_alone = j + 1 == gap_count || preserved[j + 1];
        if right_alone && ivs[j + 1].exact {
            gain += ivs[j + 1].len();
        }
        gain
    };

    let mut heap: std::collections::BinaryHeap<(u64, std::cmp::Reverse<usize>)> =
        (0..gap_count).map(|j| (gain(j, &preserved), std::cmp::Reverse(j))).collect();

    let mut chosen = 0usize;
    while chosen < (k - 1) as usize {
        let (g, std::cmp::Reverse(j)) = heap.pop().expect("fewer gaps than budget");
        if preserved[j] {
            continue;
        }
        let current = gain(j, &preserved);
        if current != g {
            heap.push((current, std::cmp::Reverse(j)));
            continue;
        }
        preserved[j] = true;
        chosen += 1;
        if j > 0 && !preserved[j - 1] {
            heap.push((gain(j - 1, &preserved), std::cmp::Reverse(j - 1)));
        }
        if j + 1 < gap_count && !preserved[j + 1] {
            heap.push((gain(j + 1, &preserved), std::cmp::Reverse(j + 1)));
        }
    }

    apply_gap_selection(s, &preserved)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(ivs: &[(u32, u32, bool)]) -> LabelSet {
        LabelSet::from_intervals(
            ivs.iter().map(|&(b, e, x)| Interval { begin: b, end: e, exact: x }).collect(),
        )
    }

    #[test]
    fn merge_subsumption_keeps_set_unchanged() {
        // node c: {[1,2]} ⊕ {[1,1]} stays {[1,2]}
        let r = merge_interval_sets(&set(&[(1, 2, true)]), &set(&[(1, 1, true)]));
        assert_eq!(r, set(&[(1, 2, true)]));
    }

    #[test]
    fn merge_disjoint_intervals() {
        // node d: {[3,3]} ⊕ {[1,1]} = {[1,1],[3,3]}
        let r = merge_interval_sets(&set(&[(3, 3, true)]), &set(&[(1, 1, true)]));
        assert_eq!(r, set(&[(1, 1, true), (3, 3, true)]));
    }

    #[test]
    fn merge_exact_extended_by_approximate_turns_approximate() {
        let r = merge_interval_sets(&set(&[(1, 3, false)]), &set(&[(3, 5, true)]));
        assert_eq!(r, set(&[(1, 5, false)]));
    }

    #[test]
    fn merge_adjacent_exacts_stay_exact() {
        let r = merge_interval_sets(&set(&[(1, 2, true)]), &set(&[(1, 1, true), (3, 3, true)]));
        assert_eq!(r, set(&[(1, 3, true)]));
    }

    #[test]
    fn merge_exact_subsuming_approximate_stays_exact() {
        let r = merge_interval_sets(&set(&[(1, 5, true)]), &set(&[(2, 3, false)]));
        assert_eq!(r, set(&[(1, 5, true)]));
    }

    #[test]
    fn merge_partial_exact_coverage_is_approximate() {
        // only [4,5] of the joined run is exact-covered
        let r = merge_interval_sets(&set(&[(1, 3, false)]), &set(&[(4, 5, true)]));
        assert_eq!(r, set(&[(1, 5, false)]));
    }

    #[test]
    fn cover_cost_counts_approximate_elements() {
        assert_eq!(set(&[(1, 1, true), (3, 3, true)]).cover_cost(), 0);
        assert_eq!(set(&[(1, 3, false), (5, 5, true)]).cover_cost(), 3);
        assert_eq!(set(&[(1, 5, false)]).cover_cost(), 5);
    }

    #[test]
    fn gaps_between_intervals() {
        assert_eq!(set(&[(1, 1, true), (3, 3, true)]).gaps().gaps, vec![(2, 2)]);
        assert_eq!(
            set(&[(1, 2, true), (5, 9, true), (12, 12, true)]).gaps().gaps,
            vec![(3, 4), (10, 11)]
        );
        assert!(set(&[(1, 5, true)]).gaps().is_empty());
    }

    #[test]
    fn gaps_reconstruct_round_trip() {
        let s = set(&[(1, 2, true), (5, 9, false), (12, 12, true)]);
        let skeleton = s.gaps().reconstruct(1, 12);
        assert_eq!(skeleton, vec![(1, 2), (5, 9), (12, 12)]);
    }

    #[test]
    fn optimal_cover_identity_when_budget_suffices() {
        let s = set(&[(1, 1, true), (3, 3, true)]);
        let r = optimal_k_cover(&s, 2);
        assert_eq!(r, s);
        assert_eq!(r.cover_cost(), 0);
    }

    #[test]
    fn optimal_cover_single_interval() {
        let s = set(&[(1, 1, true), (3, 3, true)]);
        let r = optimal_k_cover(&s, 1);
        assert_eq!(r, set(&[(1, 3, false)]));
        assert_eq!(r.cover_cost(), 3);
    }

    #[test]
    fn optimal_cover_picks_cheaper_gap() {
        let s = set(&[(1, 2, true), (5, 9, true), (12, 12, true)]);
        let r = optimal_k_cover(&s, 2);
        assert_eq!(r, set(&[(1, 2, true), (5, 12, false)]));
        assert_eq!(r.cover_cost(), 8);
    }

    #[test]
    fn greedy_cover_identity_when_budget_suffices() {
        let s = set(&[(1, 2, false), (5, 9, true), (12, 12, true)]);
        assert_eq!(greedy_k_cover(&s, 3), s);
        assert_eq!(greedy_k_cover(&s, 10), s);
    }

    #[test]
    fn greedy_cover_forced_single_merge() {
        let s = set(&[(1, 1, true), (3, 3, true)]);
        assert_eq!(greedy_k_cover(&s, 1), set(&[(1, 3, false)]));
    }

    #[test]
    fn greedy_cover_gain_trace() {
        // gap [3,4]: gain 2+2 beats gap [10,11]: gain 2+1
        let s = set(&[(1, 2, true), (5, 9, true), (12, 12, true)]);
        assert_eq!(greedy_k_cover(&s, 2), set(&[(1, 2, true), (5, 12, false)]));
    }

    #[test]
    #[should_panic(expected = "cover budget")]
    fn cover_rejects_zero_budget() {
        optimal_k_cover(&set(&[(1, 1, true)]), 0);
    }
}
