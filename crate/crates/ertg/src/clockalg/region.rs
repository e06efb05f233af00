use std::collections::BTreeSet;

use num::traits::Zero;

use crate::rat::{self, Rat};

use super::{ClockError, ClockId, ClockValuation, Clocks, Zone};

/// Canonical clock-region encoding: per-clock integer parts plus the ordered
/// partition of clocks by fractional part. `blocks[0]` is the distinguished
/// zero-fraction block (possibly empty); later blocks are nonempty and sorted
/// by strictly increasing fractional part.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Region {
    bound: u32,
    ints: Vec<u32>,
    blocks: Vec<Vec<ClockId>>,
}

impl Region {
    /// The region `[ν]` containing the valuation.
    pub fn of(nu: &ClockValuation) -> Region {
        let bound = nu.bound();
        let n = nu.len();
        let mut ints = Vec::with_capacity(n);
        let mut fracs: Vec<(Rat, ClockId)> = Vec::with_capacity(n);
        for c in 0..n {
            let id = ClockId(c as u32);
            let v = nu.get(id);
            let i = rat::floor_u32(v);
            ints.push(i);
            fracs.push((v - rat::int(i as i64), id));
        }
        fracs.sort();
        let mut blocks: Vec<Vec<ClockId>> = vec![Vec::new()];
        let mut current_frac = Rat::zero();
        for (f, id) in fracs {
            if f == current_frac {
                blocks.last_mut().unwrap().push(id);
            } else {
                current_frac = f;
                blocks.push(vec![id]);
            }
        }
        for b in blocks.iter_mut() {
            b.sort();
        }
        Region {
            bound,
            ints,
            blocks,
        }
    }

    pub fn bound(&self) -> u32 {
        self.bound
    }

    pub fn n_clocks(&self) -> usize {
        self.ints.len()
    }

    pub fn int_part(&self, c: ClockId) -> u32 {
        self.ints[c.index()]
    }

    pub fn blocks(&self) -> &[Vec<ClockId>] {
        &self.blocks
    }

    /// Position of the clock's block in the fractional order (0 = zero frac).
    fn block_of(&self, c: ClockId) -> usize {
        self.blocks
            .iter()
            .position(|b| b.contains(&c))
            .expect("clock missing from region partition")
    }

    pub fn has_zero_frac(&self, c: ClockId) -> bool {
        self.blocks[0].contains(&c)
    }

    /// True when the valuation lies inside this region exactly.
    pub fn contains(&self, nu: &ClockValuation) -> bool {
        nu.len() == self.n_clocks() && nu.bound() == self.bound && Region::of(nu) == *self
    }

    /// True when the valuation lies in the topological closure of the region.
    pub fn closure_contains(&self, nu: &ClockValuation) -> bool {
        if nu.len() != self.n_clocks() || nu.bound() != self.bound {
            return false;
        }
        self.closed_zone().contains_valuation(nu)
    }

    /// One representative valuation strictly inside the region.
    ///
    /// Fractional parts are spread as `j / (#blocks)` over the block index,
    /// which respects the recorded ordering.
    pub fn representative(&self) -> ClockValuation {
        let m = self.blocks.len() as i64;
        let mut vals = vec![Rat::zero(); self.n_clocks()];
        for (j, block) in self.blocks.iter().enumerate() {
            let frac = rat::ratio(j as i64, m);
            for c in block {
                vals[c.index()] = rat::int(self.ints[c.index()] as i64) + frac.clone();
            }
        }
        ClockValuation::new(vals, self.bound).expect("representative within bounds")
    }

    /// The unique next region under time elapse, or `None` when some clock
    /// sits at the bound `K` (no further delay is possible).
    pub fn time_successor(&self) -> Option<Region> {
        if self.ints.iter().any(|&i| i == self.bound) {
            return None;
        }
        let mut next = self.clone();
        if !self.blocks[0].is_empty() {
            // Clocks on the integer boundary move into the open interval,
            // acquiring the new smallest positive fraction.
            let zero_block = next.blocks[0].clone();
            next.blocks[0] = Vec::new();
            next.blocks.insert(1, zero_block);
        } else {
            // The largest fraction reaches the next integer.
            let last = next.blocks.pop().expect("nonempty partition");
            for c in &last {
                next.ints[c.index()] += 1;
            }
            next.blocks[0] = last;
        }
        Some(next)
    }

    /// The region chain `ζ → ζ' → …` starting at (and including) `self`.
    pub fn future_chain(&self) -> Vec<Region> {
        let mut chain = vec![self.clone()];
        while let Some(next) = chain.last().unwrap().time_successor() {
            chain.push(next);
        }
        chain
    }

    /// True iff `other` is in the future of `self` (`self →* other`).
    pub fn leads_to(&self, other: &Region) -> bool {
        let mut cur = self.clone();
        loop {
            if cur == *other {
                return true;
            }
            match cur.time_successor() {
                Some(next) => cur = next,
                None => return false,
            }
        }
    }

    /// `ζ_C`: the region obtained by resetting the clocks in `C`.
    pub fn reset(&self, clocks: &BTreeSet<ClockId>) -> Region {
        let mut ints = self.ints.clone();
        let mut blocks: Vec<Vec<ClockId>> = Vec::with_capacity(self.blocks.len());
        for (j, block) in self.blocks.iter().enumerate() {
            let kept: Vec<ClockId> = block
                .iter()
                .copied()
                .filter(|c| !clocks.contains(c))
                .collect();
            if j == 0 || !kept.is_empty() {
                blocks.push(kept);
            }
        }
        for c in clocks {
            ints[c.index()] = 0;
            blocks[0].push(*c);
        }
        blocks[0].sort();
        Region {
            bound: self.bound,
            ints,
            blocks,
        }
    }

    /// The closed interval of delays `t ≥ 0` with `ν + t ∈ cl(self)`, or
    /// `None` when empty. For `ν` inside a region whose future contains
    /// `self`, the endpoints equal the infimum and supremum of the open
    /// delay set `{t : ν + t ∈ self}`.
    pub fn delay_interval_from(&self, nu: &ClockValuation) -> Option<(Rat, Rat)> {
        debug_assert_eq!(nu.len(), self.n_clocks());
        let mut lo = Rat::zero();
        let mut hi: Option<Rat> = None;
        for c in 0..self.n_clocks() {
            let id = ClockId(c as u32);
            let i = rat::int(self.ints[c] as i64);
            let v = nu.get(id);
            // cl of the per-clock constraint: v + t ∈ [i, i] or [i, i+1].
            let (lo_c, hi_c) = if self.has_zero_frac(id) {
                (&i - v, &i - v)
            } else {
                (&i - v, &i + rat::int(1) - v)
            };
            if lo_c > lo {
                lo = lo_c;
            }
            match &mut hi {
                Some(h) => {
                    if hi_c < *h {
                        *h = hi_c;
                    }
                }
                None => hi = Some(hi_c),
            }
        }
        let hi = hi.unwrap_or_else(Rat::zero);
        if lo > hi {
            return None;
        }
        // Pairwise fractional-order constraints are constant along the
        // diagonal; check them against the closure.
        for a in 0..self.n_clocks() {
            for b in (a + 1)..self.n_clocks() {
                let (a, b) = (ClockId(a as u32), ClockId(b as u32));
                let ja = self.block_of(a);
                let jb = self.block_of(b);
                let d = rat::int(self.ints[a.index()] as i64)
                    - rat::int(self.ints[b.index()] as i64);
                let diff = nu.get(a) - nu.get(b);
                let ok = if ja == jb {
                    diff == d
                } else if ja < jb {
                    // frac(a) < frac(b): diff ∈ (d−1, d); closure [d−1, d].
                    diff >= &d - rat::int(1) && diff <= d
                } else {
                    diff >= d && diff <= &d + rat::int(1)
                };
                if !ok {
                    return None;
                }
            }
        }
        Some((lo, hi))
    }

    /// Infimum and supremum of `{t ≥ 0 : ν + t ∈ self}` via the closure
    /// extension. Errors when the delay set is empty.
    pub fn delay_bounds(&self, nu: &ClockValuation) -> Result<(Rat, Rat), ClockError> {
        self.delay_interval_from(nu).ok_or(ClockError::EmptyDelaySet)
    }

    /// The zone consisting of exactly this region.
    pub fn to_zone(&self) -> Zone {
        Zone::from_region(self)
    }

    /// The closure of the region as a zone.
    pub fn closed_zone(&self) -> Zone {
        Zone::from_region(self).closure()
    }

    pub fn render(&self, clocks: &Clocks) -> String {
        self.to_zone().render(clocks)
    }

    /// Every clock region over `n_clocks` clocks with bound `K`.
    ///
    /// Enumerates integer parts and ordered fractional partitions directly;
    /// intended for small clock counts (validator sweeps, tests).
    pub fn enumerate_all(n_clocks: usize, bound: u32) -> Vec<Region> {
        let mut out = Vec::new();
        let mut ints = vec![0u32; n_clocks];
        let mut levels = vec![0usize; n_clocks];
        enumerate_rec(0, n_clocks, bound, &mut ints, &mut levels, &mut out);
        out
    }
}

fn enumerate_rec(
    c: usize,
    n: usize,
    bound: u32,
    ints: &mut Vec<u32>,
    levels: &mut Vec<usize>,
    out: &mut Vec<Region>,
) {
    if c == n {
        // Positive levels must be used consecutively starting from 1.
        let max_level = levels.iter().copied().max().unwrap_or(0);
        for lvl in 1..=max_level {
            if !levels.contains(&lvl) {
                return;
            }
        }
        let mut blocks: Vec<Vec<ClockId>> = vec![Vec::new(); max_level + 1];
        for (i, &lvl) in levels.iter().enumerate() {
            blocks[lvl].push(ClockId(i as u32));
        }
        out.push(Region {
            bound,
            ints: ints.clone(),
            blocks,
        });
        return;
    }
    for i in 0..=bound {
        ints[c] = i;
        let level_cap = if i == bound { 0 } else { n };
        for lvl in 0..=level_cap {
            levels[c] = lvl;
            enumerate_rec(c + 1, n, bound, ints, levels, out);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::ratio;

    fn val(x: (i64, i64), y: (i64, i64)) -> ClockValuation {
        ClockValuation::new(vec![ratio(x.0, x.1), ratio(y.0, y.1)], 2).unwrap()
    }

    #[test]
    fn region_of_integer_valuation() {
        let r = Region::of(&val((0, 1), (0, 1)));
        assert_eq!(r.ints, vec![0, 0]);
        assert_eq!(r.blocks, vec![vec![ClockId(0), ClockId(1)]]);
    }

    #[test]
    fn region_of_fig_initial_state() {
        // (x:0.3, y:0.1) sits in 0 < y < x < 1.
        let r = Region::of(&val((3, 10), (1, 10)));
        assert_eq!(r.ints, vec![0, 0]);
        assert_eq!(
            r.blocks,
            vec![Vec::new(), vec![ClockId(1)], vec![ClockId(0)]]
        );
    }

    #[test]
    fn region_of_mixed_boundary() {
        // (x:1, y:0.8): x = 1 and 0 < y < 1.
        let r = Region::of(&val((1, 1), (8, 10)));
        assert_eq!(r.ints, vec![1, 0]);
        assert_eq!(r.blocks, vec![vec![ClockId(0)], vec![ClockId(1)]]);
    }

    /// Oracle for the time successor: scan increasing rational delays from a
    /// representative point and take the first region different from the
    /// current one.
    fn successor_by_delay_scan(r: &Region) -> Option<Region> {
        let nu = r.representative();
        // Scan with a step fine enough to not skip over a region: fractional
        // parts of representatives are multiples of 1/(#blocks).
        let step = ratio(1, 4 * (r.blocks().len() as i64) * 2);
        let mut t = step.clone();
        for _ in 0..200 {
            match nu.elapse(&t) {
                Ok(w) => {
                    let r2 = Region::of(&w);
                    if r2 != *r {
                        return Some(r2);
                    }
                }
                Err(_) => return None,
            }
            t += step.clone();
        }
        None
    }

    #[test]
    fn successor_matches_delay_scan_oracle() {
        let samples = [
            val((0, 1), (0, 1)),
            val((3, 10), (1, 10)),
            val((1, 1), (8, 10)),
            val((1, 2), (1, 2)),
            val((2, 1), (1, 2)),
            val((7, 4), (1, 4)),
        ];
        for nu in samples {
            let mut region = Region::of(&nu);
            for _ in 0..50 {
                let expected = successor_by_delay_scan(&region);
                let actual = region.time_successor();
                assert_eq!(actual, expected, "successor mismatch at {region:?}");
                match actual {
                    Some(next) => region = next,
                    None => break,
                }
            }
        }
    }

    #[test]
    fn successor_spec_examples() {
        // {x=0 ∧ y=0} → {0<x=y<1}
        let r = Region::of(&val((0, 1), (0, 1)));
        let s = r.time_successor().unwrap();
        assert_eq!(s, Region::of(&val((1, 2), (1, 2))));

        // {0<y<x<1} → {x=1 ∧ 0<y<1}
        let r = Region::of(&val((3, 10), (1, 10)));
        let s = r.time_successor().unwrap();
        assert_eq!(s, Region::of(&val((1, 1), (8, 10))));

        // {x=1 ∧ 0<y<1} → {1<x<2 ∧ 0<y<1 ∧ x−1<y}
        let s2 = s.time_successor().unwrap();
        assert_eq!(s2, Region::of(&val((11, 10), (9, 10))));
    }

    #[test]
    fn chain_terminates_with_distinct_steps() {
        let samples = [
            val((0, 1), (0, 1)),
            val((3, 10), (1, 10)),
            val((1, 1), (1, 1)),
            val((19, 10), (1, 10)),
        ];
        for nu in samples {
            let chain = Region::of(&nu).future_chain();
            let set: std::collections::HashSet<_> = chain.iter().collect();
            assert_eq!(set.len(), chain.len(), "chain revisits a region");
            // The terminal region has some clock pinned at the bound.
            let last = chain.last().unwrap();
            assert!(last.ints.iter().any(|&i| i == 2));
            assert!(last.time_successor().is_none());
        }
    }

    #[test]
    fn reset_spec_examples() {
        let r = Region::of(&val((3, 10), (1, 10)));
        let only_x: BTreeSet<ClockId> = [ClockId(0)].into_iter().collect();
        assert_eq!(
            r.reset(&only_x),
            Region::of(&val((0, 1), (1, 10))),
            "reset x in 0<y<x<1"
        );
        assert_eq!(r.reset(&BTreeSet::new()), r, "empty reset is identity");

        let r = Region::of(&val((1, 1), (8, 10)));
        let both: BTreeSet<ClockId> = [ClockId(0), ClockId(1)].into_iter().collect();
        assert_eq!(r.reset(&both), Region::of(&val((0, 1), (0, 1))));
    }

    #[test]
    fn delay_bounds_spec_examples() {
        let nu = val((3, 10), (1, 10));
        // ζ1 = {1<x<2 ∧ 0<y<1 ∧ x−1<y}, reached between t=0.7 and t=0.9.
        let zeta1 = Region::of(&val((11, 10), (3, 10)));
        assert_eq!(
            zeta1.delay_bounds(&nu).unwrap(),
            (ratio(7, 10), ratio(9, 10))
        );

        // Own region: inf 0, sup = exit time (x reaches 1 at t = 0.7).
        let own = Region::of(&nu);
        assert_eq!(own.delay_bounds(&nu).unwrap(), (ratio(0, 1), ratio(7, 10)));

        // ζ4 = {x=2 ∧ 1<y<2}: point delay 1.7.
        let zeta4 = Region::of(&val((2, 1), (18, 10)));
        assert_eq!(
            zeta4.delay_bounds(&nu).unwrap(),
            (ratio(17, 10), ratio(17, 10))
        );
    }

    #[test]
    fn delay_bounds_monotone_along_chain() {
        let nu = val((3, 10), (1, 10));
        let chain = Region::of(&nu).future_chain();
        let mut prev: Option<(Rat, Rat)> = None;
        for region in &chain {
            let (lo, hi) = region.delay_bounds(&nu).unwrap();
            if let Some((plo, phi)) = prev {
                assert!(plo <= lo);
                assert!(phi <= hi);
            }
            prev = Some((lo, hi));
        }
    }

    #[test]
    fn empty_delay_set_is_an_error() {
        // From (0.3, 0.1) the region {0<x<y<1} (y above x) is unreachable.
        let nu = val((3, 10), (1, 10));
        let unreachable = Region::of(&val((1, 10), (3, 10)));
        assert!(unreachable.delay_bounds(&nu).is_err());
    }
}
