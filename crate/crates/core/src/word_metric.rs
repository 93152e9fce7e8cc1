//! Word metrics on C₂≀Cₙ.
//!
//! Three routes are provided: breadth-first search over the Cayley graph for
//! any generating set of the form `(∅ × S) ∪ {({0},0)}`, an exact travelling
//! lamplighter dynamic program for the standard generators, and the cheap
//! surrogate `σ` that the word metric is comparable to.

use serde::Serialize;

use crate::error::{usage, Error, Result};
use crate::group::{cyclic_distance, inverse, mul, wrap, GroupElement, LampConfig, Lamplighter};

/// Default cap on n for dense tables (n·2ⁿ entries).
pub const DEFAULT_BFS_CAP: usize = 22;

const UNREACHED: u16 = u16::MAX;

/// Generators `(∅, s)` for `s ∈ movement`, plus the toggle `({0}, 0)` when `toggle` is set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GeneratorSet {
    n: usize,
    movement: Vec<usize>,
    toggle: bool,
}

impl GeneratorSet {
    pub fn new(n: usize, movement: impl IntoIterator<Item = usize>, toggle: bool) -> Result<Self> {
        Lamplighter::new(n)?;
        let mut movement: Vec<usize> = movement.into_iter().collect();
        if let Some(&bad) = movement.iter().find(|&&s| s == 0 || s >= n) {
            return Err(usage(format!("movement step {bad} must lie in 1..{n}")));
        }
        movement.sort_unstable();
        movement.dedup();
        Ok(GeneratorSet { n, movement, toggle })
    }

    /// `{({0},0), (∅,1)}`.
    pub fn standard(n: usize) -> Result<Self> {
        Self::new(n, [1], true)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn movement(&self) -> &[usize] {
        &self.movement
    }

    pub fn has_toggle(&self) -> bool {
        self.toggle
    }

    pub fn is_standard(&self) -> bool {
        self.toggle && self.movement == [1]
    }

    /// Movement steps closed under negation.
    pub fn symmetric_steps(&self) -> Vec<usize> {
        let n = self.n;
        let mut steps: Vec<usize> = self.movement.iter().flat_map(|&s| [s, n - s]).collect();
        steps.sort_unstable();
        steps.dedup();
        steps
    }

    /// The generators as listed (toggle first), without inverses.
    pub fn listed(&self) -> Vec<GroupElement> {
        let mut out = Vec::with_capacity(self.len());
        if self.toggle {
            out.push(GroupElement::toggle(self.n));
        }
        out.extend(self.movement.iter().map(|&s| GroupElement::step(self.n, s as i64)));
        out
    }

    /// Number of listed generators, `|S|` in averaging bounds.
    pub fn len(&self) -> usize {
        self.movement.len() + usize::from(self.toggle)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// `ρ(g, e)` for every element, indexed by [`GroupElement::dense_index`].
#[derive(Clone, Debug)]
pub struct WordMetricTable {
    n: usize,
    gens: GeneratorSet,
    dist: Vec<u16>,
}

impl WordMetricTable {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn gens(&self) -> &GeneratorSet {
        &self.gens
    }

    pub fn len(&self) -> usize {
        self.dist.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dist.is_empty()
    }

    #[inline]
    pub fn at_index(&self, index: usize) -> u32 {
        u32::from(self.dist[index])
    }

    #[inline]
    pub fn get(&self, g: &GroupElement) -> u32 {
        self.at_index(g.dense_index())
    }

    pub fn distances(&self) -> impl Iterator<Item = u32> + '_ {
        self.dist.iter().map(|&d| u32::from(d))
    }

    pub fn diameter(&self) -> u32 {
        self.distances().max().unwrap_or(0)
    }

    /// Mean of `ρ(g, e)²` over the group.
    pub fn mean_square(&self) -> f64 {
        let s: u128 = self.distances().map(|d| u128::from(d) * u128::from(d)).sum();
        s as f64 / self.len() as f64
    }
}

/// `ρ(a, b) = ρ(b⁻¹a, e)`.
pub fn pair_distance(table: &WordMetricTable, a: &GroupElement, b: &GroupElement) -> Result<u32> {
    if a.n() != table.n || b.n() != table.n {
        return Err(usage(format!("table built for n={}, got elements with n={}/{}", table.n, a.n(), b.n())));
    }
    Ok(table.get(&mul(&inverse(b), a)))
}

pub fn bfs_table(n: usize, gens: &GeneratorSet) -> Result<WordMetricTable> {
    bfs_table_with_cap(n, gens, DEFAULT_BFS_CAP)
}

/// Breadth-first layers from the identity over the symmetrized generators.
/// Frontiers are dense bit arrays over the `n·2ⁿ` index space.
pub fn bfs_table_with_cap(n: usize, gens: &GeneratorSet, cap: usize) -> Result<WordMetricTable> {
    Lamplighter::new(n)?;
    if gens.n() != n {
        return Err(usage(format!("generators built for n={}, table requested for n={n}", gens.n())));
    }
    if n > cap.min(40) {
        return Err(Error::Size { guard: "bfs", detail: format!("n={n} exceeds {}", cap.min(40)) });
    }
    let size = n << n;
    let lamp_mask = (1usize << n) - 1;
    let steps = gens.symmetric_steps();
    let mut dist = vec![UNREACHED; size];
    let words = size.div_ceil(64);
    let mut frontier = vec![0u64; words];
    let mut next = vec![0u64; words];
    dist[0] = 0;
    frontier[0] = 1;
    let mut layer: u16 = 0;
    loop {
        let mut grew = false;
        layer = layer.checked_add(1).ok_or_else(|| Error::Size {
            guard: "bfs",
            detail: "word length exceeds 65534".into(),
        })?;
        for (wi, &w) in frontier.iter().enumerate() {
            let mut rest = w;
            while rest != 0 {
                let idx = wi * 64 + rest.trailing_zeros() as usize;
                rest &= rest - 1;
                let pos = idx >> n;
                let bits = idx & lamp_mask;
                let mut visit = |j: usize| {
                    if dist[j] == UNREACHED {
                        dist[j] = layer;
                        next[j / 64] |= 1 << (j % 64);
                        grew = true;
                    }
                };
                if gens.has_toggle() {
                    // g·({0},0) flips the lamp at −pos
                    visit(idx ^ (1 << ((n - pos) % n)));
                }
                for &s in &steps {
                    visit((((pos + s) % n) << n) | bits);
                }
            }
        }
        if !grew {
            break;
        }
        std::mem::swap(&mut frontier, &mut next);
        next.iter_mut().for_each(|w| *w = 0);
    }
    if let Some(i) = dist.iter().position(|&d| d == UNREACHED) {
        return Err(Error::NotGenerating { element: GroupElement::from_dense_index(n, i).to_string() });
    }
    Ok(WordMetricTable { n, gens: gens.clone(), dist })
}

/// Exact word length for the standard generators: `|x|` toggles plus the
/// shortest closed-form walk from 0 that visits `{−k : k ∈ x}` and ends at `j`.
///
/// Covered positions always form an arc `[−a, b]` around 0. `cost[a][b][side]`
/// is the cheapest way to have covered that arc and stand at its left
/// (`side = 0`) or right end, built by unit-cost frontier extensions.
#[derive(Clone, Debug)]
pub struct TravelPlanner {
    n: usize,
    cost: Vec<[u32; 2]>,
}

impl TravelPlanner {
    pub fn new(n: usize) -> Result<Self> {
        Lamplighter::new(n)?;
        let idx = |a: usize, b: usize| a * n + b;
        let mut cost = vec![[u32::MAX; 2]; n * n];
        cost[idx(0, 0)] = [0, 0];
        // states in order of covered length a + b
        for len in 0..n {
            for a in 0..=len {
                let b = len - a;
                let span = len as u32;
                // standing at either end, the other end is reachable in-arc
                let [l, r] = cost[idx(a, b)];
                let (l, r) = (l.min(r.saturating_add(span)), r.min(l.saturating_add(span)));
                cost[idx(a, b)] = [l, r];
                if len + 1 == n {
                    continue;
                }
                let c = &mut cost[idx(a + 1, b)][0];
                *c = (*c).min(l + 1);
                let c = &mut cost[idx(a, b + 1)][1];
                *c = (*c).min(r + 1);
            }
        }
        Ok(TravelPlanner { n, cost })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    fn finish(&self, a: usize, b: usize, j: usize) -> u32 {
        let n = self.n;
        let [l, r] = self.cost[a * n + b];
        let left_end = (n - a) % n;
        (l + cyclic_distance(left_end, j, n) as u32).min(r + cyclic_distance(b, j, n) as u32)
    }

    /// Minimal travel from 0 visiting every member of `visits` and ending at `j`.
    ///
    /// Costs are monotone in the covered arc, so only arcs whose uncovered gap
    /// lies between two consecutive visit points need to be examined.
    pub fn min_travel(&self, visits: &LampConfig, j: usize) -> u32 {
        let n = self.n;
        let mut best = u32::MAX;
        let mut prev = 0usize;
        for q in visits.members().filter(|&q| q != 0).chain(std::iter::once(n)) {
            // uncovered gap is (prev, q): arc [−(n − q), prev]
            let a = (n - q) % n;
            best = best.min(self.finish(a, prev, j));
            prev = q;
        }
        best
    }

    /// Same value as [`min_travel`](Self::min_travel) by scanning every DP state.
    pub fn min_travel_full_scan(&self, visits: &LampConfig, j: usize) -> u32 {
        let n = self.n;
        let mut best = u32::MAX;
        for a in 0..n {
            for b in 0..n - a {
                let covered = visits.members().all(|p| p <= b || p >= n - a || p == 0);
                if covered {
                    best = best.min(self.finish(a, b, j));
                }
            }
        }
        best
    }

    /// `ρ((x, j), e)` for the standard generators.
    pub fn word_length(&self, lamps: &LampConfig, j: usize) -> u32 {
        lamps.len() as u32 + self.min_travel(&lamps.negate(), j)
    }

    pub fn element_length(&self, g: &GroupElement) -> u32 {
        self.word_length(&g.lamps, g.pos.value())
    }

    /// Exact `ρ(a, b)` for the standard generators at any n.
    pub fn pair_distance(&self, a: &GroupElement, b: &GroupElement) -> u32 {
        self.element_length(&mul(&inverse(b), a))
    }
}

/// One-shot form of [`TravelPlanner::word_length`].
pub fn exact_travel_metric(x: &LampConfig, j: usize) -> Result<u32> {
    let n = x.n();
    if j >= n {
        return Err(usage(format!("position {j} out of range for n={n}")));
    }
    Ok(TravelPlanner::new(n)?.word_length(x, j))
}

/// Exact mean of `ρ(g, e)²` over C₂≀Cₙ for the standard generators.
///
/// Counts configurations by threshold: for each end position `j` and level `t`,
/// a chain DP over the sorted visit points counts the sets whose every gap
/// costs at least `t`. Runs in O(n⁴) and needs no enumeration of the group.
pub fn standard_mean_square(n: usize) -> Result<f64> {
    let planner = TravelPlanner::new(n)?;
    if n > 100 {
        return Err(Error::Size { guard: "second moment", detail: format!("n={n} exceeds 100") });
    }
    let m = (n - 1) as u128;
    // visit points other than 0 range over subsets of {1..n−1}
    let subsets: u128 = 1u128 << (n - 1);
    let sum_s: u128 = m << (n - 1) >> 1;
    let sum_s2: u128 = m * (m + 1) * (subsets >> 2);
    // gap cost between consecutive chain points b < e (e = n closes the chain)
    let mut total: u128 = 0;
    let mut gap = vec![0u32; (n + 1) * (n + 1)];
    for j in 0..n {
        let mut tmax = 0;
        for b in 0..n {
            for e in b + 1..=n {
                let c = planner.finish((n - e) % n, b, j);
                gap[b * (n + 1) + e] = c;
                tmax = tmax.max(c);
            }
        }
        let (mut sum_t, mut sum_t2, mut sum_st) = (0u128, 0u128, 0u128);
        let mut count = vec![0u128; n + 1];
        let mut sizes = vec![0u128; n + 1];
        for t in 1..=tmax {
            count.iter_mut().for_each(|c| *c = 0);
            sizes.iter_mut().for_each(|c| *c = 0);
            count[0] = 1;
            for e in 1..=n {
                let inc = u128::from(e < n);
                let (mut c, mut s) = (0u128, 0u128);
                for b in 0..e {
                    if count[b] != 0 && gap[b * (n + 1) + e] >= t {
                        c += count[b];
                        s += sizes[b] + count[b] * inc;
                    }
                }
                count[e] = c;
                sizes[e] = s;
            }
            let t = u128::from(t);
            sum_t += count[n];
            sum_t2 += (2 * t - 1) * count[n];
            sum_st += sizes[n];
        }
        // lamp 0 is free: it adds one toggle and never changes the walk
        let base = sum_s2 + 2 * sum_st + sum_t2;
        let shifted = base + 2 * (sum_s + sum_t) + subsets;
        total += base + shifted;
    }
    let order = (n as f64) * 2f64.powi(n as i32);
    Ok(total as f64 / order)
}

/// `σ((x, j), e) = d(0, j) + max_{k∈x}(d(0, k) + 1)`, with the max read as 0 on ∅.
pub fn sigma_from_identity(g: &GroupElement) -> u32 {
    let n = g.n();
    let reach = g.lamps.members().map(|k| cyclic_distance(0, k, n) + 1).max().unwrap_or(0);
    (cyclic_distance(0, g.pos.value(), n) + reach) as u32
}

/// Surrogate metric: the larger of the two one-sided surrogates of `b⁻¹a` and
/// `a⁻¹b`, which makes it symmetric and left-invariant.
pub fn surrogate_sigma(a: &GroupElement, b: &GroupElement) -> Result<u32> {
    let d = crate::group::displacement(a, b)?;
    Ok(sigma_from_identity(&d).max(sigma_from_identity(&inverse(&d))))
}

/// Realized extremes of `ρ/σ` over a table (identity excluded).
#[derive(Clone, Copy, Debug, Serialize, PartialEq)]
pub struct SigmaBand {
    pub min_ratio: f64,
    pub max_ratio: f64,
}

pub fn sigma_band(table: &WordMetricTable) -> SigmaBand {
    let n = table.n;
    let mut band = SigmaBand { min_ratio: f64::INFINITY, max_ratio: 0.0 };
    for i in 1..table.len() {
        let g = GroupElement::from_dense_index(n, i);
        let sigma = sigma_from_identity(&g).max(sigma_from_identity(&inverse(&g)));
        let r = f64::from(table.at_index(i)) / f64::from(sigma);
        band.min_ratio = band.min_ratio.min(r);
        band.max_ratio = band.max_ratio.max(r);
    }
    band
}

/// Wraps a signed step for callers building generator lists from CLI input.
pub fn normalize_step(step: i64, n: usize) -> usize {
    wrap(step, n)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn el(n: usize, lamps: &[usize], pos: usize) -> GroupElement {
        GroupElement::from_parts(n, lamps, pos).unwrap()
    }

    #[test]
    fn bfs_generator_distances() {
        let t = bfs_table(4, &GeneratorSet::standard(4).unwrap()).unwrap();
        assert_eq!(t.get(&GroupElement::identity(4)), 0);
        assert_eq!(t.get(&GroupElement::toggle(4)), 1);
        assert_eq!(t.get(&GroupElement::step(4, 1)), 1);
        assert_eq!(t.get(&el(4, &[3], 1)), 2);
    }

    #[test]
    fn bfs_rejects_non_generating_sets() {
        let gens = GeneratorSet::new(5, [1], false).unwrap();
        assert!(matches!(bfs_table(5, &gens), Err(Error::NotGenerating { .. })));
        let gens = GeneratorSet::new(6, [2], true).unwrap();
        assert!(matches!(bfs_table(6, &gens), Err(Error::NotGenerating { .. })));
    }

    #[test]
    fn bfs_guard() {
        let gens = GeneratorSet::standard(9).unwrap();
        assert!(matches!(bfs_table_with_cap(9, &gens, 8), Err(Error::Size { .. })));
    }

    #[test]
    fn travel_examples() {
        assert_eq!(exact_travel_metric(&LampConfig::empty(12), 5).unwrap(), 5);
        let x = LampConfig::from_members(4, [1, 3]).unwrap();
        assert_eq!(exact_travel_metric(&x, 0).unwrap(), 6);
        let x = LampConfig::from_members(4, [3]).unwrap();
        assert_eq!(exact_travel_metric(&x, 1).unwrap(), 2);
    }

    #[test]
    fn gap_query_matches_full_state_scan() {
        for n in [3, 5, 8, 9] {
            let p = TravelPlanner::new(n).unwrap();
            for bits in 0..1u64 << n {
                let v = LampConfig::from_bits(n, bits);
                for j in 0..n {
                    assert_eq!(p.min_travel(&v, j), p.min_travel_full_scan(&v, j));
                }
            }
        }
    }

    #[test]
    fn surrogate_examples() {
        let g = el(6, &[2, 5], 4);
        assert_eq!(surrogate_sigma(&g, &g).unwrap(), 0);
        let e = GroupElement::identity(6);
        assert_eq!(surrogate_sigma(&GroupElement::toggle(6), &e).unwrap(), 1);
        assert_eq!(surrogate_sigma(&el(4, &[3], 1), &GroupElement::identity(4)).unwrap(), 3);
    }

    #[test]
    fn surrogate_is_symmetric_and_invariant() {
        let g = Lamplighter::new(5).unwrap();
        let all: Vec<_> = g.elements().collect();
        for (i, a) in all.iter().enumerate().step_by(7) {
            for b in all.iter().skip(i % 5).step_by(11) {
                let s = surrogate_sigma(a, b).unwrap();
                assert_eq!(s, surrogate_sigma(b, a).unwrap());
                let h = &all[(i * 13) % all.len()];
                assert_eq!(s, surrogate_sigma(&mul(h, a), &mul(h, b)).unwrap());
            }
        }
    }

    #[test]
    fn pair_distance_example() {
        let t = bfs_table(4, &GeneratorSet::standard(4).unwrap()).unwrap();
        let a = el(4, &[1, 3], 0);
        let b = el(4, &[1, 3], 2);
        assert_eq!(pair_distance(&t, &a, &b).unwrap(), 2);
        assert_eq!(pair_distance(&t, &a, &a).unwrap(), 0);
        let e = GroupElement::identity(4);
        assert_eq!(pair_distance(&t, &a, &e).unwrap(), t.get(&a));
    }

    #[test]
    fn table_invariants() {
        let n = 6;
        let gens = GeneratorSet::new(n, [1, 2], true).unwrap();
        let t = bfs_table(n, &gens).unwrap();
        let listed = gens.listed();
        for i in 0..t.len() {
            let g = GroupElement::from_dense_index(n, i);
            assert_eq!(t.get(&g), t.get(&inverse(&g)));
            for s in &listed {
                let d = t.get(&mul(&g, s)) as i64 - t.get(&g) as i64;
                assert!(d.abs() <= 1);
            }
        }
    }

    #[test]
    fn mean_square_matches_bfs() {
        for n in 3..=10 {
            let t = bfs_table(n, &GeneratorSet::standard(n).unwrap()).unwrap();
            let exact = standard_mean_square(n).unwrap();
            assert!((exact - t.mean_square()).abs() < 1e-9 * exact, "n={n}");
        }
    }
}
